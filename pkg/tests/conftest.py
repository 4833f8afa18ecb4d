"""Shared fixture helpers: write corpus CSV files from row tuples."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest

SCHEMAS = {
    "publications.csv": ("pub_id", "year", "doc_type", "citations", "total_author_count"),
    "pub_categories.csv": ("pub_id", "category_id", "weight"),
    "pub_authors.csv": ("pub_id", "position", "is_domestic_academic", "university_id", "sds_id"),
    "staff.csv": ("researcher_id", "university_id", "sds_id", "years_on_staff"),
    "taxonomy.csv": ("sds_id", "uda_id", "is_life_science"),
    "macro_map.csv": ("uda_id", "macro_id"),
    "categories.csv": ("category_id", "is_life_science"),
    "peer_outcomes.csv": ("university_id", "uda_id", "E", "G", "A", "L"),
    "indicators.csv": ("indicator_name", "direction", "university_id", "value"),
}


def write_file(directory: Path, name: str, rows: list[tuple]) -> Path:
    path = directory / name
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCHEMAS[name])
        writer.writerows(rows)
    return path


def write_corpus(
    directory: Path,
    publications: list[tuple],
    pub_categories: list[tuple],
    pub_authors: list[tuple],
    staff: list[tuple],
    taxonomy: list[tuple],
    macro_map: list[tuple] | None = None,
    categories: list[tuple] | None = None,
    peer_outcomes: list[tuple] | None = None,
    indicators: list[tuple] | None = None,
) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    write_file(directory, "publications.csv", publications)
    write_file(directory, "pub_categories.csv", pub_categories)
    write_file(directory, "pub_authors.csv", pub_authors)
    write_file(directory, "staff.csv", staff)
    write_file(directory, "taxonomy.csv", taxonomy)
    if macro_map is not None:
        write_file(directory, "macro_map.csv", macro_map)
    if categories is not None:
        write_file(directory, "categories.csv", categories)
    if peer_outcomes is not None:
        write_file(directory, "peer_outcomes.csv", peer_outcomes)
    if indicators is not None:
        write_file(directory, "indicators.csv", indicators)
    return directory


def minimal_rows() -> dict[str, list[tuple]]:
    """Smallest valid corpus: one publication by one researcher."""
    return {
        "publications": [("P1", 2001, "article", 4, 1)],
        "pub_categories": [("P1", "C1", "1.0")],
        "pub_authors": [("P1", 1, "true", "U1", "S1")],
        "staff": [("R1", "U1", "S1", "3.0")],
        "taxonomy": [("S1", "UDA1", "false")],
    }


@pytest.fixture
def minimal_corpus_dir(tmp_path: Path) -> Path:
    return write_corpus(tmp_path / "corpus", **minimal_rows())
