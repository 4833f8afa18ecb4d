from pathlib import Path

import pytest

from bibliorank.corpus import (
    PeerOutcome,
    emit_corpus,
    load_corpus,
    read_indicators_csv,
    validate_peer_outcomes,
)
from bibliorank.errors import ValidationError

from conftest import minimal_rows, write_corpus, write_file

WINDOW = (2001, 2003)


def test_minimal_corpus_loads(minimal_corpus_dir):
    corpus = load_corpus(minimal_corpus_dir, WINDOW)
    assert len(corpus.publications) == 1
    assert len(corpus.staff) == 1
    assert corpus.rejected_count == 0
    assert corpus.universities() == ["U1"]
    assert corpus.window_years == 3


def test_category_weights_must_sum_to_one(tmp_path):
    rows = minimal_rows()
    rows["pub_categories"] = [("P1", "C1", "0.5"), ("P1", "C2", "0.6")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="weights sum 1.1"):
        load_corpus(directory, WINDOW)


def test_out_of_window_publication_rejected_with_count(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 1999, "article", 4, 1)]
    directory = write_corpus(tmp_path, **rows)
    corpus = load_corpus(directory, WINDOW)
    assert len(corpus.publications) == 0
    assert corpus.rejected_count == 1
    assert corpus.rejected_out_of_window == 1


def test_publication_without_domestic_author_rejected(tmp_path):
    rows = minimal_rows()
    rows["pub_authors"] = [("P1", 1, "false", "", "")]
    directory = write_corpus(tmp_path, **rows)
    corpus = load_corpus(directory, WINDOW)
    assert len(corpus.publications) == 0
    assert corpus.rejected_no_domestic == 1


def test_duplicate_pub_id_rejected(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 2001, "article", 4, 1), ("P1", 2002, "article", 1, 1)]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="duplicate pub_id"):
        load_corpus(directory, WINDOW)


def test_error_messages_name_file_and_line(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 2001, "article", -1, 1)]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match=r"publications\.csv:2"):
        load_corpus(directory, WINDOW)


def test_staff_sds_must_resolve_to_uda(tmp_path):
    rows = minimal_rows()
    rows["staff"] = [("R1", "U1", "S_UNKNOWN", "3.0")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="no UDA"):
        load_corpus(directory, WINDOW)


def test_author_university_must_be_in_roster(tmp_path):
    rows = minimal_rows()
    rows["pub_authors"] = [("P1", 1, "true", "U_GHOST", "S1")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="absent from staff roster"):
        load_corpus(directory, WINDOW)


def test_author_pair_needs_staff_entry(tmp_path):
    rows = minimal_rows()
    rows["staff"].append(("R2", "U2", "S2", "3.0"))
    rows["taxonomy"].append(("S2", "UDA1", "false"))
    rows["pub_authors"] = [("P1", 1, "true", "U2", "S1")]  # U2 exists, but not in S1
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="no staff entry"):
        load_corpus(directory, WINDOW)


def test_domestic_author_requires_affiliation(tmp_path):
    rows = minimal_rows()
    rows["pub_authors"] = [("P1", 1, "true", "U1", "")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="requires university_id and sds_id"):
        load_corpus(directory, WINDOW)


def test_duplicate_byline_position_rejected(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 2001, "article", 4, 2)]
    rows["pub_authors"] = [("P1", 1, "true", "U1", "S1"), ("P1", 1, "false", "", "")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="duplicate position"):
        load_corpus(directory, WINDOW)


def test_listed_authors_cannot_exceed_total(tmp_path):
    rows = minimal_rows()
    rows["pub_authors"] = [("P1", 1, "true", "U1", "S1"), ("P1", "", "false", "", "")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="exceed total_author_count"):
        load_corpus(directory, WINDOW)


def test_position_beyond_total_rejected(tmp_path):
    rows = minimal_rows()
    rows["pub_authors"] = [("P1", 5, "true", "U1", "S1")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="exceeds total_author_count"):
        load_corpus(directory, WINDOW)


def test_life_science_publication_requires_positions(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 2001, "article", 4, 2)]
    rows["pub_authors"] = [("P1", "", "true", "U1", "S1")]
    rows["categories"] = [("C1", "true")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="unknown author positions"):
        load_corpus(directory, WINDOW)


def test_unknown_positions_tolerated_outside_life_science(tmp_path):
    rows = minimal_rows()
    rows["publications"] = [("P1", 2001, "article", 4, 2)]
    rows["pub_authors"] = [("P1", "", "true", "U1", "S1")]
    directory = write_corpus(tmp_path, **rows)
    corpus = load_corpus(directory, WINDOW)
    assert corpus.publications[0].authors[0].position is None


def test_years_on_staff_bounds(tmp_path):
    rows = minimal_rows()
    rows["staff"] = [("R1", "U1", "S1", "3.5")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="years_on_staff"):
        load_corpus(directory, WINDOW)


def test_bad_window_rejected(minimal_corpus_dir):
    with pytest.raises(ValidationError, match="precedes"):
        load_corpus(minimal_corpus_dir, (2003, 2001))


def test_missing_required_file(tmp_path):
    rows = minimal_rows()
    directory = write_corpus(tmp_path, **rows)
    (directory / "staff.csv").unlink()
    with pytest.raises(ValidationError, match="missing required input file"):
        load_corpus(directory, WINDOW)


def test_wrong_header_rejected(tmp_path):
    rows = minimal_rows()
    directory = write_corpus(tmp_path, **rows)
    (directory / "staff.csv").write_text("who,where\nR1,U1\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="expected header"):
        load_corpus(directory, WINDOW)


def test_indicator_direction_validated(tmp_path):
    rows = minimal_rows()
    rows["indicators"] = [("LAT", "sideways", "U1", "41.5")]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="direction"):
        load_corpus(directory, WINDOW)


def test_indicator_duplicate_university_rejected(tmp_path):
    rows = minimal_rows()
    rows["indicators"] = [
        ("LAT", "higher_is_better", "U1", "41.5"),
        ("LAT", "higher_is_better", "U1", "42.0"),
    ]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="duplicate university_id"):
        load_corpus(directory, WINDOW)


def test_indicators_loaded(tmp_path):
    rows = minimal_rows()
    rows["indicators"] = [
        ("LAT", "higher_is_better", "U1", "41.5"),
        ("RES", "lower_is_better", "U1", "7.0"),
    ]
    directory = write_corpus(tmp_path, **rows)
    corpus = load_corpus(directory, WINDOW)
    assert [t.indicator_name for t in corpus.indicators] == ["LAT", "RES"]
    assert corpus.indicator("LAT").values == {"U1": 41.5}
    with pytest.raises(KeyError):
        corpus.indicator("GDP")


def test_validate_peer_outcomes():
    ok = PeerOutcome("TorVergata", "math", 17, 5, 1, 0, 23)
    bad = PeerOutcome("X", "math", 1, 1, 0, 0, 1)
    report = validate_peer_outcomes([ok, bad])
    assert [check.ok for check in report] == [True, False]
    assert validate_peer_outcomes([]) == []


def test_peer_outcomes_loaded_with_derived_total(tmp_path):
    rows = minimal_rows()
    rows["peer_outcomes"] = [("U1", "UDA1", 17, 5, 1, 0)]
    directory = write_corpus(tmp_path, **rows)
    corpus = load_corpus(directory, WINDOW)
    assert corpus.peer_outcomes[0].T == 23


def test_peer_outcomes_all_zero_rejected(tmp_path):
    rows = minimal_rows()
    rows["peer_outcomes"] = [("U1", "UDA1", 0, 0, 0, 0)]
    directory = write_corpus(tmp_path, **rows)
    with pytest.raises(ValidationError, match="zero"):
        load_corpus(directory, WINDOW)


def _rich_corpus_dir(tmp_path: Path) -> Path:
    return write_corpus(
        tmp_path / "rich",
        publications=[
            ("P1", 2001, "article", 4, 3),
            ("P2", 2002, "review", 0, 5),
            ("P3", 2003, "proceedings", 9, 2),
        ],
        pub_categories=[
            ("P1", "C1", "0.6"),
            ("P1", "C2", "0.4"),
            ("P2", "LC1", "1.0"),
            ("P3", "C1", "1.0"),
        ],
        pub_authors=[
            ("P1", "", "true", "U1", "S1"),
            ("P1", "", "true", "U2", "S1"),
            ("P2", 1, "true", "U1", "S2"),
            ("P2", 5, "true", "U1", "S2"),
            ("P2", 3, "false", "", ""),
            ("P3", 1, "true", "U2", "S1"),
        ],
        staff=[
            ("R1", "U1", "S1", "3.0"),
            ("R2", "U1", "S2", "1.5"),
            ("R3", "U2", "S1", "2.0"),
        ],
        taxonomy=[("S1", "UDA1", "false"), ("S2", "UDA2", "true")],
        macro_map=[("UDA1", "M1"), ("UDA2", "M1")],
        categories=[("C1", "false"), ("C2", "false"), ("LC1", "true")],
        peer_outcomes=[("U1", "UDA1", 3, 1, 0, 0), ("U2", "UDA1", 1, 2, 1, 0)],
        indicators=[
            ("LAT", "higher_is_better", "U1", "45.2"),
            ("LAT", "higher_is_better", "U2", "38.1"),
        ],
    )


def test_round_trip_emit_and_reload(tmp_path):
    corpus = load_corpus(_rich_corpus_dir(tmp_path), WINDOW)
    out = tmp_path / "emitted"
    emit_corpus(corpus, out)
    reloaded = load_corpus(out, WINDOW)
    assert reloaded == corpus


def test_loading_is_deterministic(tmp_path):
    directory = _rich_corpus_dir(tmp_path)
    assert load_corpus(directory, WINDOW) == load_corpus(directory, WINDOW)


def test_emission_is_byte_deterministic(tmp_path):
    corpus = load_corpus(_rich_corpus_dir(tmp_path), WINDOW)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    emit_corpus(corpus, out_a)
    emit_corpus(corpus, out_b)
    for path in sorted(out_a.iterdir()):
        assert path.read_bytes() == (out_b / path.name).read_bytes()


def test_read_indicators_csv_standalone(tmp_path):
    path = write_file(tmp_path, "indicators.csv", [("NI", "higher_is_better", "U1", "1.2")])
    tables = read_indicators_csv(path)
    assert tables[0].indicator_name == "NI"
    assert tables[0].values["U1"] == 1.2
