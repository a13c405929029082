"""Event-duration catalogs: parsing, validation, summaries.

A catalog row is one eruption with a duration in years, a censoring flag
(ongoing eruptions only give a lower bound on duration), a composition
class, and an optional silica percentage used by the regression model.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

__all__ = [
    "CatalogError",
    "CompositionClass",
    "EruptionRecord",
    "Catalog",
    "CatalogSummary",
    "parse_catalog",
    "serialize_catalog",
    "summarize",
    "load_fixture_long_durations",
]

CSV_HEADER = ["volcano", "start_year", "duration_yr", "status", "class", "silica_pct"]

SILICA_MIN = 30.0
SILICA_MAX = 90.0


class CatalogError(ValueError):
    """Malformed or inconsistent catalog input."""


class CompositionClass(Enum):
    MAFIC = "mafic"
    INTERMEDIATE = "intermediate"
    EVOLVED = "evolved"


@dataclass(frozen=True)
class EruptionRecord:
    """One catalog row.

    ``censored=True`` means the eruption was still ongoing at the catalog
    date, so ``duration`` is only a lower bound.
    """

    volcano_name: str
    start_year: float
    duration: float
    censored: bool
    composition_class: CompositionClass
    silica_pct: Optional[float] = None

    def __post_init__(self):
        if not self.duration > 0:
            raise CatalogError(
                f"duration must be > 0, got {self.duration} for {self.volcano_name!r}"
            )
        if self.silica_pct is not None and not (
            SILICA_MIN <= self.silica_pct <= SILICA_MAX
        ):
            raise CatalogError(
                f"silica_pct {self.silica_pct} outside [{SILICA_MIN}, {SILICA_MAX}] "
                f"for {self.volcano_name!r}"
            )


@dataclass(frozen=True)
class Catalog:
    """Immutable ordered collection of eruption records."""

    records: tuple[EruptionRecord, ...]
    as_of_date: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def n1(self) -> int:
        """Number of uncensored (completed) records."""
        return sum(1 for r in self.records if not r.censored)

    @property
    def n0(self) -> int:
        """Number of censored (ongoing) records."""
        return sum(1 for r in self.records if r.censored)

    def filter_class(self, cls: CompositionClass) -> "Catalog":
        return Catalog(
            tuple(r for r in self.records if r.composition_class is cls),
            self.as_of_date,
        )

    def completed_only(self) -> "Catalog":
        return Catalog(
            tuple(r for r in self.records if not r.censored), self.as_of_date
        )

    def concat(self, other: "Catalog") -> "Catalog":
        return Catalog(self.records + other.records, self.as_of_date)


@dataclass(frozen=True)
class CatalogSummary:
    total: int
    completed: int
    ongoing: int
    by_class: dict = field(default_factory=dict)  # class value -> (total, completed, ongoing)


def _parse_silica(text: str, line_no: int) -> Optional[float]:
    text = text.strip()
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        raise CatalogError(f"line {line_no}: bad silica_pct {text!r}") from None


def parse_catalog(source, as_of_date: Optional[str] = None) -> Catalog:
    """Parse a catalog from CSV text or a readable stream.

    Expected header: ``volcano,start_year,duration_yr,status,class,silica_pct``
    with status in {completed, ongoing} and class in
    {mafic, intermediate, evolved}.  Lines starting with ``#`` are ignored.

    Raises CatalogError with a line number on any malformed row.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    records = []
    header_seen = False
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        row = next(csv.reader([line]))
        if not header_seen:
            got = [c.strip().lower() for c in row]
            if got != CSV_HEADER:
                raise CatalogError(
                    f"line {line_no}: expected header {','.join(CSV_HEADER)!r}, "
                    f"got {line!r}"
                )
            header_seen = True
            continue
        if len(row) != 6:
            raise CatalogError(f"line {line_no}: expected 6 fields, got {len(row)}")
        name, start_s, dur_s, status, cls_s, sil_s = (c.strip() for c in row)
        try:
            start_year = float(start_s)
            duration = float(dur_s)
        except ValueError:
            raise CatalogError(f"line {line_no}: non-numeric year/duration") from None
        if not duration > 0:
            raise CatalogError(f"line {line_no}: duration must be > 0, got {duration}")
        status_l = status.lower()
        if status_l not in ("completed", "ongoing"):
            raise CatalogError(f"line {line_no}: unknown status {status!r}")
        try:
            comp = CompositionClass(cls_s.lower())
        except ValueError:
            raise CatalogError(
                f"line {line_no}: unknown composition class {cls_s!r}"
            ) from None
        silica = _parse_silica(sil_s, line_no)
        try:
            records.append(
                EruptionRecord(
                    volcano_name=name,
                    start_year=start_year,
                    duration=duration,
                    censored=(status_l == "ongoing"),
                    composition_class=comp,
                    silica_pct=silica,
                )
            )
        except CatalogError as exc:
            raise CatalogError(f"line {line_no}: {exc}") from None

    if not header_seen:
        raise CatalogError("empty catalog: no header found")
    if not records:
        raise CatalogError("empty catalog")
    return Catalog(tuple(records), as_of_date)


def serialize_catalog(catalog: Catalog) -> str:
    """Render a catalog back to CSV; parse_catalog round-trips it exactly."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in catalog.records:
        writer.writerow(
            [
                r.volcano_name,
                repr(r.start_year),
                repr(r.duration),
                "ongoing" if r.censored else "completed",
                r.composition_class.value,
                "" if r.silica_pct is None else repr(r.silica_pct),
            ]
        )
    return out.getvalue()


def summarize(catalog: Catalog) -> CatalogSummary:
    by_class = {}
    for cls in CompositionClass:
        sub = [r for r in catalog.records if r.composition_class is cls]
        comp = sum(1 for r in sub if not r.censored)
        by_class[cls.value] = (len(sub), comp, len(sub) - comp)
    return CatalogSummary(
        total=catalog.n,
        completed=catalog.n1,
        ongoing=catalog.n0,
        by_class=by_class,
    )


# Durations (years) of all catalog eruptions lasting five years or more,
# ascending; censored=True marks eruptions still ongoing at the catalog date.
_LONG_DURATION_FIXTURE = (
    (5.0, 1310, "OKATAINA", False),
    (5.4, 1970, "KARANGETANG [API SIAU]", False),
    (5.4, 1870, "CEBORUCO, VOLCAN", False),
    (5.4, 1991, "SOPUTAN", False),
    (5.4, 1944, "SHIVELUCH", False),
    (5.5, 1951, "LAMINGTON", False),
    (6.0, 1872, "SINARKA", False),
    (6.6, 1980, "ST. HELENS", False),
    (7.1, 1994, "ETNA", False),
    (8.6, 1984, "LASCAR", False),
    (8.7, 1897, "DONA JUANA", False),
    (10.2, 2005, "POPOCATEPETL", True),
    (10.3, 2004, "REVENTADOR", True),
    (11.3, 2000, "SOPUTAN", False),
    (12.4, 1970, "KARYMSKY", False),
    (13.0, 1973, "CHILLAN, NEVADOS DE", False),
    (13.2, 2002, "FUEGO", True),
    (13.3, 2001, "KARYMSKY", True),
    (15.4, 1999, "MAYON", False),
    (16.2, 1998, "IBU", True),
    (18.5, 1913, "COLIMA", False),
    (19.7, 1995, "SOUFRIERE HILLS", True),
    (23.0, 1972, "BAGANA", False),
    (23.7, 1991, "KARANGETANG [API SIAU]", True),
    (27.0, 1883, "BOGOSLOF", False),
    (27.1, 1796, "BOGOSLOF", False),
    (27.6, 1973, "LANGILA", False),
    (34.6, 1980, "SHIVELUCH", True),
    (40.0, 1869, "COLIMA", False),
    (42.5, 1968, "ARENAL", False),
    (45.0, 1890, "VICTORY", False),
    (57.8, 1957, "COLIMA", True),
    (59.4, 1955, "BEZYMIANNY", True),
    (68.4, 1946, "SEMERU", True),
    (78.8, 1934, "SANGAY", False),
    (92.7, 1922, "SANTA MARIA [SANTIAGUITO]", True),
    (187.7, 1728, "SANGAY", False),
    (246.6, 1768, "MERAPI", True),
)


def load_fixture_long_durations() -> list[tuple[float, int, str, bool]]:
    """Embedded list of (duration_yr, start_year, name, censored) for all
    catalog eruptions lasting five years or longer, sorted ascending."""
    return [tuple(row) for row in _LONG_DURATION_FIXTURE]
