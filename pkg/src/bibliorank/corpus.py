"""Input corpus: publications, staff roster, taxonomy, peer outcomes, indicators.

All inputs are comma-delimited UTF-8 CSV files with a header row:

    publications.csv    pub_id,year,doc_type,citations,total_author_count
    pub_categories.csv  pub_id,category_id,weight
    pub_authors.csv     pub_id,position,is_domestic_academic,university_id,sds_id
    staff.csv           researcher_id,university_id,sds_id,years_on_staff
    taxonomy.csv        sds_id,uda_id,is_life_science
    macro_map.csv       uda_id,macro_id
    peer_outcomes.csv   university_id,uda_id,E,G,A,L
    indicators.csv      indicator_name,direction,university_id,value
    categories.csv      category_id,is_life_science

The first five files are required; the rest are optional and default to
empty.  In ``pub_authors.csv`` the university/sds fields are empty for
external (non-domestic) co-authors and ``position`` may be empty when
byline order is unknown.  Author slots not listed at all are implicit
anonymous external co-authors; ``total_author_count`` is always the full
byline length.

Loading is fail-fast: the first violation raises :class:`ValidationError`
naming the file and line.  A loaded :class:`Corpus` is immutable and safe
for unrestricted concurrent reads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import ValidationError

DOC_TYPES = ("article", "review", "proceedings")
HIGHER_IS_BETTER = "higher_is_better"
LOWER_IS_BETTER = "lower_is_better"
DIRECTIONS = (HIGHER_IS_BETTER, LOWER_IS_BETTER)

WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class AuthorSlot:
    """One byline slot.  External co-authors carry no university/SDS."""

    position: int | None
    university_id: str | None
    sds_id: str | None
    is_domestic_academic: bool


@dataclass(frozen=True)
class PublicationRecord:
    """One indexed output with its citation count and byline."""

    pub_id: str
    year: int
    doc_type: str
    citations: int
    categories: tuple[tuple[str, float], ...]  # (category_id, weight), weights sum to 1
    authors: tuple[AuthorSlot, ...]            # listed slots only, may omit externals
    total_author_count: int


@dataclass(frozen=True)
class StaffEntry:
    """One researcher-university-SDS affiliation over the observation window."""

    researcher_id: str
    university_id: str
    sds_id: str
    years_on_staff: float


@dataclass(frozen=True)
class Taxonomy:
    """SDS -> UDA -> macro-UDA hierarchy plus life-science flags."""

    sds_to_uda: dict[str, str]
    uda_to_macro: dict[str, str]
    life_science_sds: frozenset[str]
    life_science_categories: frozenset[str]

    def uda_of(self, sds_id: str) -> str:
        try:
            return self.sds_to_uda[sds_id]
        except KeyError:
            raise KeyError(f"SDS {sds_id!r} has no UDA in the taxonomy") from None

    def is_life_science_publication(self, pub: PublicationRecord) -> bool:
        return any(cat in self.life_science_categories for cat, _ in pub.categories)


@dataclass(frozen=True)
class PeerOutcome:
    """Peer-review grade counts for one (university, UDA) cell.

    ``T`` is the declared total of submitted outputs; rows where the four
    grade counts do not add up to it are caught by
    :func:`validate_peer_outcomes`, not at construction.
    """

    university_id: str
    uda_id: str
    E: int
    G: int
    A: int
    L: int
    T: int


@dataclass(frozen=True)
class IndicatorTable:
    """One externally sourced indicator with its ranking direction."""

    indicator_name: str
    direction: str  # HIGHER_IS_BETTER or LOWER_IS_BETTER
    values: dict[str, float]  # university_id -> value


class PeerOutcomeCheck(NamedTuple):
    university_id: str
    uda_id: str
    ok: bool


@dataclass(frozen=True)
class Corpus:
    """Cross-validated, immutable snapshot of all inputs for one window."""

    window: tuple[int, int]
    publications: tuple[PublicationRecord, ...]
    staff: tuple[StaffEntry, ...]
    taxonomy: Taxonomy
    peer_outcomes: tuple[PeerOutcome, ...]
    indicators: tuple[IndicatorTable, ...]
    rejected_out_of_window: int = field(default=0, compare=False)
    rejected_no_domestic: int = field(default=0, compare=False)

    @property
    def rejected_count(self) -> int:
        return self.rejected_out_of_window + self.rejected_no_domestic

    @property
    def window_years(self) -> int:
        start, end = self.window
        return end - start + 1

    def universities(self) -> list[str]:
        return sorted({e.university_id for e in self.staff})

    def staff_pairs(self) -> frozenset[tuple[str, str]]:
        return frozenset((e.university_id, e.sds_id) for e in self.staff)

    def indicator(self, name: str) -> IndicatorTable:
        for table in self.indicators:
            if table.indicator_name == name:
                return table
        raise KeyError(f"no indicator named {name!r}")


@dataclass(frozen=True)
class CorpusPaths:
    publications: Path
    pub_categories: Path
    pub_authors: Path
    staff: Path
    taxonomy: Path
    macro_map: Path
    peer_outcomes: Path
    indicators: Path
    categories: Path

    @classmethod
    def from_dir(cls, root: Path | str) -> "CorpusPaths":
        root = Path(root)
        return cls(
            publications=root / "publications.csv",
            pub_categories=root / "pub_categories.csv",
            pub_authors=root / "pub_authors.csv",
            staff=root / "staff.csv",
            taxonomy=root / "taxonomy.csv",
            macro_map=root / "macro_map.csv",
            peer_outcomes=root / "peer_outcomes.csv",
            indicators=root / "indicators.csv",
            categories=root / "categories.csv",
        )


# ---------------------------------------------------------------------------
# CSV primitives


def _read_rows(path: Path, columns: tuple[str, ...], required: bool) -> list[tuple[int, dict[str, str]]]:
    """Read a CSV file, returning (line_number, row) pairs.

    Optional files that do not exist yield no rows; existing files must
    carry exactly the expected header.
    """
    if not path.exists():
        if required:
            raise ValidationError(f"{path.name}: missing required input file")
        return []
    rows: list[tuple[int, dict[str, str]]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path.name}:1: empty file, header row required")
        if tuple(reader.fieldnames) != columns:
            raise ValidationError(
                f"{path.name}:1: expected header {','.join(columns)!r}, got {','.join(reader.fieldnames)!r}"
            )
        for row in reader:
            if None in row or any(v is None for v in row.values()):
                raise ValidationError(f"{path.name}:{reader.line_num}: wrong number of fields")
            rows.append((reader.line_num, row))
    return rows


def _parse_int(name: str, line: int, column: str, raw: str, minimum: int | None = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{name}:{line}: {column} must be an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name}:{line}: {column} must be >= {minimum}, got {value}")
    return value


def _parse_float(name: str, line: int, column: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(f"{name}:{line}: {column} must be a number, got {raw!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ValidationError(f"{name}:{line}: {column} must be finite, got {raw!r}")
    return value


def _parse_bool(name: str, line: int, column: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValidationError(f"{name}:{line}: {column} must be true/false, got {raw!r}")


def _require(name: str, line: int, column: str, raw: str) -> str:
    value = raw.strip()
    if not value:
        raise ValidationError(f"{name}:{line}: {column} must not be empty")
    return value


# ---------------------------------------------------------------------------
# Loading


def load_corpus(paths: CorpusPaths | Path | str, window: tuple[int, int]) -> Corpus:
    """Load, cross-validate and index all corpus files.

    Publications dated outside ``window`` and publications without any
    domestic author slot are dropped and counted on the returned corpus;
    every other violation raises :class:`ValidationError`.
    """
    if not isinstance(paths, CorpusPaths):
        paths = CorpusPaths.from_dir(paths)
    start, end = window
    if end < start:
        raise ValidationError(f"window {start}-{end}: end year precedes start year")
    window_len = end - start + 1

    taxonomy = _load_taxonomy(paths)
    staff = _load_staff(paths.staff, taxonomy, window_len)
    universities = {e.university_id for e in staff}
    pairs = {(e.university_id, e.sds_id) for e in staff}

    publications, out_of_window, no_domestic = _load_publications(
        paths, taxonomy, universities, pairs, window
    )
    peer_outcomes = read_peer_outcomes_csv(paths.peer_outcomes)
    indicators = read_indicators_csv(paths.indicators)

    return Corpus(
        window=window,
        publications=publications,
        staff=staff,
        taxonomy=taxonomy,
        peer_outcomes=peer_outcomes,
        indicators=indicators,
        rejected_out_of_window=out_of_window,
        rejected_no_domestic=no_domestic,
    )


def _load_taxonomy(paths: CorpusPaths) -> Taxonomy:
    name = paths.taxonomy.name
    sds_to_uda: dict[str, str] = {}
    life_sds: set[str] = set()
    for line, row in _read_rows(paths.taxonomy, ("sds_id", "uda_id", "is_life_science"), required=True):
        sds = _require(name, line, "sds_id", row["sds_id"])
        uda = _require(name, line, "uda_id", row["uda_id"])
        if sds in sds_to_uda:
            raise ValidationError(f"{name}:{line}: duplicate sds_id {sds!r}")
        sds_to_uda[sds] = uda
        if _parse_bool(name, line, "is_life_science", row["is_life_science"]):
            life_sds.add(sds)

    macro_name = paths.macro_map.name
    uda_to_macro: dict[str, str] = {}
    for line, row in _read_rows(paths.macro_map, ("uda_id", "macro_id"), required=False):
        uda = _require(macro_name, line, "uda_id", row["uda_id"])
        macro = _require(macro_name, line, "macro_id", row["macro_id"])
        if uda in uda_to_macro:
            raise ValidationError(f"{macro_name}:{line}: duplicate uda_id {uda!r}")
        uda_to_macro[uda] = macro

    cat_name = paths.categories.name
    life_categories: set[str] = set()
    seen_cats: set[str] = set()
    for line, row in _read_rows(paths.categories, ("category_id", "is_life_science"), required=False):
        cat = _require(cat_name, line, "category_id", row["category_id"])
        if cat in seen_cats:
            raise ValidationError(f"{cat_name}:{line}: duplicate category_id {cat!r}")
        seen_cats.add(cat)
        if _parse_bool(cat_name, line, "is_life_science", row["is_life_science"]):
            life_categories.add(cat)

    return Taxonomy(
        sds_to_uda={k: sds_to_uda[k] for k in sorted(sds_to_uda)},
        uda_to_macro={k: uda_to_macro[k] for k in sorted(uda_to_macro)},
        life_science_sds=frozenset(life_sds),
        life_science_categories=frozenset(life_categories),
    )


def _load_staff(path: Path, taxonomy: Taxonomy, window_len: int) -> tuple[StaffEntry, ...]:
    name = path.name
    entries: list[StaffEntry] = []
    seen: set[tuple[str, str, str]] = set()
    for line, row in _read_rows(path, ("researcher_id", "university_id", "sds_id", "years_on_staff"), required=True):
        researcher = _require(name, line, "researcher_id", row["researcher_id"])
        university = _require(name, line, "university_id", row["university_id"])
        sds = _require(name, line, "sds_id", row["sds_id"])
        years = _parse_float(name, line, "years_on_staff", row["years_on_staff"])
        if not 0 < years <= window_len:
            raise ValidationError(
                f"{name}:{line}: years_on_staff must be in (0, {window_len}], got {years:g}"
            )
        if sds not in taxonomy.sds_to_uda:
            raise ValidationError(f"{name}:{line}: sds {sds!r} has no UDA in taxonomy.csv")
        key = (researcher, university, sds)
        if key in seen:
            raise ValidationError(f"{name}:{line}: duplicate staff entry {key}")
        seen.add(key)
        entries.append(StaffEntry(researcher, university, sds, years))
    entries.sort(key=lambda e: (e.researcher_id, e.university_id, e.sds_id))
    return tuple(entries)


def _load_publications(
    paths: CorpusPaths,
    taxonomy: Taxonomy,
    universities: set[str],
    pairs: set[tuple[str, str]],
    window: tuple[int, int],
) -> tuple[tuple[PublicationRecord, ...], int, int]:
    name = paths.publications.name
    heads: dict[str, tuple[int, int, str, int, int]] = {}  # pub_id -> (line, year, doc_type, citations, total)
    for line, row in _read_rows(
        paths.publications, ("pub_id", "year", "doc_type", "citations", "total_author_count"), required=True
    ):
        pid = _require(name, line, "pub_id", row["pub_id"])
        if pid in heads:
            raise ValidationError(f"{name}:{line}: duplicate pub_id {pid!r}")
        year = _parse_int(name, line, "year", row["year"])
        doc_type = _require(name, line, "doc_type", row["doc_type"])
        if doc_type not in DOC_TYPES:
            raise ValidationError(f"{name}:{line}: doc_type must be one of {DOC_TYPES}, got {doc_type!r}")
        citations = _parse_int(name, line, "citations", row["citations"], minimum=0)
        total = _parse_int(name, line, "total_author_count", row["total_author_count"], minimum=1)
        heads[pid] = (line, year, doc_type, citations, total)

    cat_name = paths.pub_categories.name
    categories: dict[str, list[tuple[str, float]]] = {pid: [] for pid in heads}
    for line, row in _read_rows(paths.pub_categories, ("pub_id", "category_id", "weight"), required=True):
        pid = _require(cat_name, line, "pub_id", row["pub_id"])
        if pid not in heads:
            raise ValidationError(f"{cat_name}:{line}: unknown pub_id {pid!r}")
        cat = _require(cat_name, line, "category_id", row["category_id"])
        weight = _parse_float(cat_name, line, "weight", row["weight"])
        if not 0 < weight <= 1:
            raise ValidationError(f"{cat_name}:{line}: weight must be in (0, 1], got {weight:g}")
        if any(cat == existing for existing, _ in categories[pid]):
            raise ValidationError(f"{cat_name}:{line}: duplicate category {cat!r} for pub {pid!r}")
        categories[pid].append((cat, weight))

    auth_name = paths.pub_authors.name
    authors: dict[str, list[AuthorSlot]] = {pid: [] for pid in heads}
    for line, row in _read_rows(
        paths.pub_authors, ("pub_id", "position", "is_domestic_academic", "university_id", "sds_id"), required=True
    ):
        pid = _require(auth_name, line, "pub_id", row["pub_id"])
        if pid not in heads:
            raise ValidationError(f"{auth_name}:{line}: unknown pub_id {pid!r}")
        total = heads[pid][4]
        raw_pos = row["position"].strip()
        position = None
        if raw_pos:
            position = _parse_int(auth_name, line, "position", raw_pos, minimum=1)
            if position > total:
                raise ValidationError(
                    f"{auth_name}:{line}: position {position} exceeds total_author_count {total}"
                )
            if any(slot.position == position for slot in authors[pid]):
                raise ValidationError(f"{auth_name}:{line}: duplicate position {position} for pub {pid!r}")
        domestic = _parse_bool(auth_name, line, "is_domestic_academic", row["is_domestic_academic"])
        university = row["university_id"].strip() or None
        sds = row["sds_id"].strip() or None
        if domestic:
            if university is None or sds is None:
                raise ValidationError(
                    f"{auth_name}:{line}: domestic author requires university_id and sds_id"
                )
            if university not in universities:
                raise ValidationError(
                    f"{auth_name}:{line}: university {university!r} absent from staff roster"
                )
            if sds not in taxonomy.sds_to_uda:
                raise ValidationError(f"{auth_name}:{line}: sds {sds!r} has no UDA in taxonomy.csv")
            if (university, sds) not in pairs:
                raise ValidationError(
                    f"{auth_name}:{line}: no staff entry for ({university!r}, {sds!r})"
                )
        authors[pid].append(AuthorSlot(position, university, sds, domestic))

    publications: list[PublicationRecord] = []
    out_of_window = 0
    no_domestic = 0
    start, end = window
    for pid in sorted(heads):
        line, year, doc_type, citations, total = heads[pid]
        cats = categories[pid]
        if not cats:
            raise ValidationError(f"{cat_name}: pub {pid!r}: no categories listed")
        weight_sum = sum(w for _, w in cats)
        if abs(weight_sum - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"{cat_name}: pub {pid!r}: weights sum {weight_sum:g}")
        slots = authors[pid]
        if len(slots) > total:
            raise ValidationError(
                f"{auth_name}: pub {pid!r}: {len(slots)} listed authors exceed total_author_count {total}"
            )
        life_science = any(cat in taxonomy.life_science_categories for cat, _ in cats)
        if life_science and any(slot.position is None for slot in slots):
            raise ValidationError(
                f"{auth_name}: pub {pid!r}: life-science publication with unknown author positions"
            )
        record = PublicationRecord(
            pub_id=pid,
            year=year,
            doc_type=doc_type,
            citations=citations,
            categories=tuple(sorted(cats)),
            authors=tuple(
                sorted(slots, key=lambda s: (s.position is None, s.position or 0, s.university_id or "", s.sds_id or ""))
            ),
            total_author_count=total,
        )
        if not start <= year <= end:
            out_of_window += 1
            continue
        if not any(slot.is_domestic_academic for slot in record.authors):
            no_domestic += 1
            continue
        publications.append(record)
    return tuple(publications), out_of_window, no_domestic


def read_peer_outcomes_csv(path: Path) -> tuple[PeerOutcome, ...]:
    """Read peer-review grade counts; the total T is the sum of the four grades."""
    name = path.name
    outcomes: list[PeerOutcome] = []
    seen: set[tuple[str, str]] = set()
    for line, row in _read_rows(path, ("university_id", "uda_id", "E", "G", "A", "L"), required=False):
        university = _require(name, line, "university_id", row["university_id"])
        uda = _require(name, line, "uda_id", row["uda_id"])
        counts = tuple(_parse_int(name, line, grade, row[grade], minimum=0) for grade in ("E", "G", "A", "L"))
        total = sum(counts)
        if total < 1:
            raise ValidationError(f"{name}:{line}: all grade counts are zero")
        key = (university, uda)
        if key in seen:
            raise ValidationError(f"{name}:{line}: duplicate outcome for {key}")
        seen.add(key)
        outcomes.append(PeerOutcome(university, uda, *counts, T=total))
    outcomes.sort(key=lambda o: (o.uda_id, o.university_id))
    return tuple(outcomes)


def read_indicators_csv(path: Path) -> tuple[IndicatorTable, ...]:
    """Read external indicator values, one table per indicator name."""
    name = path.name
    directions: dict[str, str] = {}
    values: dict[str, dict[str, float]] = {}
    for line, row in _read_rows(path, ("indicator_name", "direction", "university_id", "value"), required=False):
        indicator = _require(name, line, "indicator_name", row["indicator_name"])
        direction = _require(name, line, "direction", row["direction"])
        if direction not in DIRECTIONS:
            raise ValidationError(f"{name}:{line}: direction must be one of {DIRECTIONS}, got {direction!r}")
        university = _require(name, line, "university_id", row["university_id"])
        value = _parse_float(name, line, "value", row["value"])
        if indicator in directions and directions[indicator] != direction:
            raise ValidationError(f"{name}:{line}: conflicting direction for indicator {indicator!r}")
        directions[indicator] = direction
        table = values.setdefault(indicator, {})
        if university in table:
            raise ValidationError(f"{name}:{line}: duplicate university_id {university!r} for {indicator!r}")
        table[university] = value
    return tuple(
        IndicatorTable(indicator, directions[indicator], {k: values[indicator][k] for k in sorted(values[indicator])})
        for indicator in sorted(values)
    )


def validate_peer_outcomes(outcomes: Iterable[PeerOutcome]) -> list[PeerOutcomeCheck]:
    """Flag rows whose grade counts do not add up to the declared total."""
    return [
        PeerOutcomeCheck(o.university_id, o.uda_id, o.E + o.G + o.A + o.L == o.T)
        for o in outcomes
    ]


# ---------------------------------------------------------------------------
# Emission


def write_csv(path: Path, header: tuple[str, ...], rows: Iterable[tuple]) -> None:
    """Write rows as UTF-8 CSV with a fixed newline so output is byte-stable."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: float) -> str:
    return repr(float(value))


def emit_corpus(corpus: Corpus, out_dir: Path | str) -> None:
    """Write the corpus back to the canonical CSV files under ``out_dir``.

    Emission is deterministic; reloading yields an equal corpus.
    """
    out = Path(out_dir)
    paths = CorpusPaths.from_dir(out)
    write_csv(
        paths.publications,
        ("pub_id", "year", "doc_type", "citations", "total_author_count"),
        ((p.pub_id, p.year, p.doc_type, p.citations, p.total_author_count) for p in corpus.publications),
    )
    write_csv(
        paths.pub_categories,
        ("pub_id", "category_id", "weight"),
        ((p.pub_id, cat, _fmt(w)) for p in corpus.publications for cat, w in p.categories),
    )
    write_csv(
        paths.pub_authors,
        ("pub_id", "position", "is_domestic_academic", "university_id", "sds_id"),
        (
            (
                p.pub_id,
                "" if slot.position is None else slot.position,
                "true" if slot.is_domestic_academic else "false",
                slot.university_id or "",
                slot.sds_id or "",
            )
            for p in corpus.publications
            for slot in p.authors
        ),
    )
    write_csv(
        paths.staff,
        ("researcher_id", "university_id", "sds_id", "years_on_staff"),
        ((e.researcher_id, e.university_id, e.sds_id, _fmt(e.years_on_staff)) for e in corpus.staff),
    )
    write_csv(
        paths.taxonomy,
        ("sds_id", "uda_id", "is_life_science"),
        (
            (sds, uda, "true" if sds in corpus.taxonomy.life_science_sds else "false")
            for sds, uda in corpus.taxonomy.sds_to_uda.items()
        ),
    )
    write_csv(
        paths.macro_map,
        ("uda_id", "macro_id"),
        corpus.taxonomy.uda_to_macro.items(),
    )
    categories = sorted(
        {cat for p in corpus.publications for cat, _ in p.categories} | set(corpus.taxonomy.life_science_categories)
    )
    write_csv(
        paths.categories,
        ("category_id", "is_life_science"),
        ((cat, "true" if cat in corpus.taxonomy.life_science_categories else "false") for cat in categories),
    )
    write_csv(
        paths.peer_outcomes,
        ("university_id", "uda_id", "E", "G", "A", "L"),
        ((o.university_id, o.uda_id, o.E, o.G, o.A, o.L) for o in corpus.peer_outcomes),
    )
    write_csv(
        paths.indicators,
        ("indicator_name", "direction", "university_id", "value"),
        (
            (t.indicator_name, t.direction, university, _fmt(value))
            for t in corpus.indicators
            for university, value in t.values.items()
        ),
    )
