"""Command-line front end: score, vtr, rank, compare, synth, report.

All subcommands read an optional INI config file (``--config``) whose
values individual flags override.  Outputs are written under ``--out-dir``
and are byte-identical across reruns with the same inputs and seed.

Exit codes: 0 success, 1 runtime failure, 2 input validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import corpus as corpus_mod
from . import peer_rating, productivity, rankcmp, synth
from .errors import ValidationError

DEFAULT_WINDOW = (2001, 2003)
FORMATS = ("csv", "json", "markdown")
_EXT = {"csv": "csv", "json": "json", "markdown": "md"}


@dataclass(frozen=True)
class RunConfig:
    window: tuple[int, int] = DEFAULT_WINDOW
    corpus_dir: Path | None = None
    out_dir: Path = Path("out")
    out_format: str = "csv"
    rng_seed: int = 0
    percentages: tuple[float, ...] = rankcmp.DEFAULT_PERCENTAGES


def parse_window(raw: str) -> tuple[int, int]:
    try:
        start, end = raw.split("-")
        return int(start), int(end)
    except ValueError:
        raise ValidationError(f"window must look like 2001-2003, got {raw!r}") from None


def parse_percentages(raw: str) -> tuple[float, ...]:
    values = []
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            value = float(piece)
        except ValueError:
            raise ValidationError(f"bad percentage {piece!r}") from None
        if not 0 < value <= 100:
            raise ValidationError(f"percentage must be in (0, 100], got {piece}")
        values.append(value)
    if not values:
        raise ValidationError("empty percentages list")
    return tuple(values)


def _read_ini(path: Path) -> configparser.ConfigParser:
    if not path.exists():
        raise ValidationError(f"{path}: missing config file")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Layer defaults, then the config file, then explicit flags."""
    config = RunConfig()
    if args.config:
        ini = _read_ini(Path(args.config))
        if ini.has_option("io", "out_dir"):
            config = replace(config, out_dir=Path(ini.get("io", "out_dir")))
        if ini.has_option("io", "format"):
            config = replace(config, out_format=ini.get("io", "format"))
        if ini.has_option("corpus", "dir"):
            config = replace(config, corpus_dir=Path(ini.get("corpus", "dir")))
        if ini.has_option("analysis", "window"):
            config = replace(config, window=parse_window(ini.get("analysis", "window")))
        if ini.has_option("analysis", "percentages"):
            config = replace(config, percentages=parse_percentages(ini.get("analysis", "percentages")))
        if ini.has_option("synth", "seed"):
            config = replace(config, rng_seed=ini.getint("synth", "seed"))
    if getattr(args, "out_dir", None):
        config = replace(config, out_dir=Path(args.out_dir))
    if getattr(args, "format", None):
        config = replace(config, out_format=args.format)
    if getattr(args, "corpus_dir", None):
        config = replace(config, corpus_dir=Path(args.corpus_dir))
    if getattr(args, "window", None):
        config = replace(config, window=parse_window(args.window))
    if getattr(args, "percentages", None):
        config = replace(config, percentages=parse_percentages(args.percentages))
    if getattr(args, "seed", None) is not None:
        config = replace(config, rng_seed=args.seed)
    if config.out_format not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {config.out_format!r}")
    return config


def build_synth_params(args: argparse.Namespace, config: RunConfig) -> synth.SynthParams:
    values: dict[str, object] = {"seed": config.rng_seed}
    if args.config:
        ini = _read_ini(Path(args.config))
        if ini.has_section("synth"):
            section = ini["synth"]
            for key, caster in _SYNTH_KEYS.items():
                if key in section:
                    values[_SYNTH_RENAME.get(key, key)] = caster(section[key])
    for key in _SYNTH_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[_SYNTH_RENAME.get(key, key)] = flag
    values["window"] = config.window
    values["seed"] = config.rng_seed
    try:
        return synth.SynthParams(**values)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ValidationError(f"bad synth parameter: {exc}") from None


_SYNTH_RENAME = {"universities": "n_universities", "udas": "n_udas"}
_SYNTH_KEYS: dict[str, type] = {
    "universities": int,
    "udas": int,
    "sds_per_uda": int,
    "life_science_udas": int,
    "staff_presence": float,
    "staff_min": int,
    "staff_max": int,
    "pubs_per_fte": float,
    "multi_category_rate": float,
    "cross_university_rate": float,
    "external_listed_rate": float,
    "max_external_authors": int,
    "citation_sigma": float,
    "gradient_strength": float,
    "peer_noise": float,
}


def _require_corpus_dir(config: RunConfig) -> Path:
    if config.corpus_dir is None:
        raise ValidationError("no corpus directory given (use --corpus-dir or [corpus] dir)")
    return config.corpus_dir


def _safe_label(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_score(args: argparse.Namespace) -> int:
    config = build_config(args)
    corpus = corpus_mod.load_corpus(_require_corpus_dir(config), config.window)
    bundle = productivity.score_corpus(corpus)
    out = config.out_dir
    productivity.write_score_csv(bundle.sds, out / "scores_sds.csv")
    productivity.write_score_csv(bundle.uda, out / "scores_uda.csv")
    productivity.write_score_csv(bundle.macro, out / "scores_macro.csv")
    productivity.write_score_csv(bundle.university, out / "scores_university.csv")
    productivity.write_eligibility_csv(bundle.eligibility, out / "eligibility.csv")
    eligible = sum(1 for e in bundle.eligibility.values() if e.eligible)
    print(
        f"scored {len(corpus.publications)} publications "
        f"({corpus.rejected_count} rejected), {len(corpus.universities())} universities, "
        f"{eligible}/{len(bundle.eligibility)} SDSs eligible -> {out}"
    )
    return 0


def cmd_vtr(args: argparse.Namespace) -> int:
    config = build_config(args)
    outcomes = corpus_mod.read_peer_outcomes_csv(Path(args.outcomes))
    rated = peer_rating.rate_outcomes(outcomes)
    out = config.out_dir / "vtr_ratings.csv"
    peer_rating.write_rated_csv(rated, out)
    print(f"rated {len(rated)} (university, UDA) cells -> {out}")
    return 0


def _sniff_header(path: Path) -> tuple[str, ...]:
    if not path.exists():
        raise ValidationError(f"{path}: missing input file")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            return tuple(next(reader))
        except StopIteration:
            raise ValidationError(f"{path.name}:1: empty file, header row required") from None


def cmd_rank(args: argparse.Namespace) -> int:
    config = build_config(args)
    path = Path(args.input)
    header = _sniff_header(path)
    rankings: list[rankcmp.RankingList] = []
    if header == ("level", "university_id", "unit_id", "P", "RS"):
        table = productivity.read_score_csv(path)
        units = sorted({unit for _, unit in table.entries}) if args.unit is None else [args.unit]
        for unit in units:
            scores = table.university_scores(unit)
            if not scores:
                raise ValidationError(f"{path.name}: no rows for unit {args.unit!r}")
            label = args.label or (f"P_{table.level}_{unit}" if unit else f"P_{table.level}")
            rankings.append(
                rankcmp.build_ranking(scores, corpus_mod.HIGHER_IS_BETTER, label, table.level)
            )
    elif header == ("indicator_name", "direction", "university_id", "value"):
        if args.unit is not None:
            raise ValidationError("--unit does not apply to indicator files")
        tables = corpus_mod.read_indicators_csv(path)
        if args.label and len(tables) > 1:
            raise ValidationError("--label requires a single-indicator file")
        for table in tables:
            label = args.label or table.indicator_name
            rankings.append(
                rankcmp.build_ranking(table.values, table.direction, label, "university")
            )
    elif header == ("university_id", "uda_id", "R", "category_percentile"):
        rated = _read_rated_csv(path)
        udas = sorted({uda for _, uda in rated}) if args.unit is None else [args.unit]
        for uda in udas:
            scores = {univ: value for (univ, cell_uda), value in rated.items() if cell_uda == uda}
            if not scores:
                raise ValidationError(f"{path.name}: no rows for UDA {uda!r}")
            label = args.label or f"VTR_{uda}"
            rankings.append(rankcmp.build_ranking(scores, corpus_mod.HIGHER_IS_BETTER, label, "uda"))
    else:
        raise ValidationError(f"{path.name}: unrecognized header {','.join(header)!r}")
    for ranking in rankings:
        out = config.out_dir / f"ranking_{_safe_label(ranking.label)}.csv"
        rankcmp.write_ranking_csv(ranking, out)
        print(f"ranked {ranking.n} entities ({ranking.label}) -> {out}")
    return 0


def _read_rated_csv(path: Path) -> dict[tuple[str, str], float]:
    rated: dict[tuple[str, str], float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                key = (row["university_id"].strip(), row["uda_id"].strip())
                rated[key] = float(row["R"])
            except (AttributeError, KeyError, TypeError, ValueError):
                raise ValidationError(f"{path.name}:{reader.line_num}: malformed row") from None
    return rated


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _emit_comparisons(
    rankings: list[rankcmp.RankingList], config: RunConfig, out: Path
) -> None:
    ext = _EXT[config.out_format]
    matrix = rankcmp.correlation_matrix(rankings)
    _write_text(out / f"correlation_matrix.{ext}", rankcmp.render_matrix(matrix, config.out_format))
    for i in range(len(rankings)):
        for j in range(i + 1, len(rankings)):
            report = rankcmp.compare_rankings(rankings[i], rankings[j], config.percentages)
            name = f"comparison_{_safe_label(report.label_a)}_vs_{_safe_label(report.label_b)}.{ext}"
            _write_text(out / name, rankcmp.render_comparison(report, config.out_format))


def cmd_compare(args: argparse.Namespace) -> int:
    config = build_config(args)
    if len(args.rankings) < 2:
        raise ValidationError("compare needs at least 2 ranking files")
    rankings = [rankcmp.read_ranking_csv(Path(p)) for p in args.rankings]
    _emit_comparisons(rankings, config, config.out_dir)
    pairs = len(rankings) * (len(rankings) - 1) // 2
    print(f"compared {len(rankings)} rankings ({pairs} pairs) -> {config.out_dir}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = build_config(args)
    params = build_synth_params(args, config)
    data = synth.synthesize(params, config.out_dir)
    print(
        f"synthesized {len(data.publications)} publications, {len(data.staff)} staff, "
        f"{params.n_universities} universities (seed {params.seed}) -> {config.out_dir}"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    config = build_config(args)
    corpus = corpus_mod.load_corpus(_require_corpus_dir(config), config.window)
    out = config.out_dir
    bundle = productivity.score_corpus(corpus)
    productivity.write_score_csv(bundle.sds, out / "scores_sds.csv")
    productivity.write_score_csv(bundle.uda, out / "scores_uda.csv")
    productivity.write_score_csv(bundle.macro, out / "scores_macro.csv")
    productivity.write_score_csv(bundle.university, out / "scores_university.csv")
    productivity.write_eligibility_csv(bundle.eligibility, out / "eligibility.csv")

    rankings = [
        rankcmp.build_ranking(bundle.university.university_scores(""), corpus_mod.HIGHER_IS_BETTER, "P", "university")
    ]
    if corpus.peer_outcomes:
        rated = peer_rating.rate_outcomes(corpus.peer_outcomes)
        peer_rating.write_rated_csv(rated, out / "vtr_ratings.csv")
        pooled = peer_rating.pooled_university_ratings(corpus.peer_outcomes)
        rankings.append(rankcmp.build_ranking(pooled, corpus_mod.HIGHER_IS_BETTER, "VTR", "university"))
    for table in corpus.indicators:
        rankings.append(
            rankcmp.build_ranking(table.values, table.direction, table.indicator_name, "university")
        )
    for ranking in rankings:
        rankcmp.write_ranking_csv(ranking, out / f"ranking_{_safe_label(ranking.label)}.csv")
    if len(rankings) < 2:
        raise ValidationError("report needs peer outcomes or indicators to compare against P")
    _emit_comparisons(rankings, config, out)
    print(f"report over {len(rankings)} rankings -> {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bibliorank",
        description="Field-normalized productivity scoring, peer ratings, and ranking comparison",
    )
    parser.add_argument("--config", help="INI config file; flags override its values")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out-dir", help="output directory (default: out)")
        p.add_argument("--format", choices=FORMATS, help="report format (default: csv)")

    p_score = sub.add_parser("score", help="compute productivity score tables from a corpus")
    p_score.add_argument("--corpus-dir", help="directory with the corpus CSV files")
    p_score.add_argument("--window", help="observation window, e.g. 2001-2003")
    common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_vtr = sub.add_parser("vtr", help="compute peer-review ratings and category percentiles")
    p_vtr.add_argument("--outcomes", required=True, help="peer_outcomes.csv file")
    common(p_vtr)
    p_vtr.set_defaults(func=cmd_vtr)

    p_rank = sub.add_parser("rank", help="build ranking lists from scores, indicators, or ratings")
    p_rank.add_argument("--input", required=True, help="score table, indicators, or vtr ratings CSV")
    p_rank.add_argument("--unit", help="restrict to one unit id (SDS/UDA/macro)")
    p_rank.add_argument("--label", help="ranking label (single ranking only)")
    common(p_rank)
    p_rank.set_defaults(func=cmd_rank)

    p_cmp = sub.add_parser("compare", help="compare ranking files pairwise")
    p_cmp.add_argument("rankings", nargs="+", help="ranking CSV files (entity_id,score,rank)")
    p_cmp.add_argument("--percentages", help="top-k percentages, e.g. 5,10,25")
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p_synth.add_argument("--seed", type=int, help="RNG seed")
    p_synth.add_argument("--window", help="observation window, e.g. 2001-2003")
    p_synth.add_argument("--universities", type=int, help="number of universities")
    p_synth.add_argument("--udas", type=int)
    p_synth.add_argument("--sds-per-uda", dest="sds_per_uda", type=int)
    p_synth.add_argument("--life-science-udas", dest="life_science_udas", type=int)
    p_synth.add_argument("--staff-presence", dest="staff_presence", type=float)
    p_synth.add_argument("--staff-min", dest="staff_min", type=int)
    p_synth.add_argument("--staff-max", dest="staff_max", type=int)
    p_synth.add_argument("--pubs-per-fte", dest="pubs_per_fte", type=float)
    p_synth.add_argument("--gradient-strength", dest="gradient_strength", type=float)
    p_synth.add_argument("--peer-noise", dest="peer_noise", type=float)
    p_synth.add_argument("--citation-sigma", dest="citation_sigma", type=float)
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_rep = sub.add_parser("report", help="full pipeline: score, rate, rank, compare")
    p_rep.add_argument("--corpus-dir", help="directory with the corpus CSV files")
    p_rep.add_argument("--window", help="observation window, e.g. 2001-2003")
    p_rep.add_argument("--percentages", help="top-k percentages, e.g. 5,10,25")
    common(p_rep)
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
