import numpy as np
import pytest

from domecast.catalog import Catalog, CompositionClass, EruptionRecord


def make_record(
    duration,
    censored=False,
    silica=None,
    name="TEST",
    start=2000.0,
    comp=CompositionClass.INTERMEDIATE,
):
    return EruptionRecord(
        volcano_name=name,
        start_year=start,
        duration=duration,
        censored=censored,
        composition_class=comp,
        silica_pct=silica,
    )


def make_catalog(rows):
    """rows: iterable of (duration, censored) or (duration, censored, silica)."""
    records = []
    for i, row in enumerate(rows):
        silica = row[2] if len(row) > 2 else None
        records.append(
            make_record(row[0], censored=row[1], silica=silica, name=f"V{i}")
        )
    return Catalog(tuple(records))


@pytest.fixture
def small_catalog():
    return make_catalog([(1.0, False), (2.5, False), (0.8, True), (4.0, False)])


@pytest.fixture
def silica_catalog():
    rng = np.random.default_rng(123)
    classes = {
        50.0: CompositionClass.MAFIC,
        58.0: CompositionClass.INTERMEDIATE,
        67.0: CompositionClass.EVOLVED,
    }
    records = []
    for i in range(60):
        x = float(rng.choice([50.0, 58.0, 67.0]))
        t = float(0.7 * np.expm1(-np.log(rng.random()) / 0.65))
        records.append(
            make_record(
                t,
                censored=bool(rng.random() < 0.1),
                silica=x,
                name=f"V{i}",
                comp=classes[x],
            )
        )
    return Catalog(tuple(records))
