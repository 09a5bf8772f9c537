"""Command-line surface: ingest, compute, analyze, emit.

Subcommands: ingest-validate, indicators, bins, correlate, regress,
map-grid, rank-countries, synth. All artifacts are written atomically
(write to a temp file, then rename), so a failed run leaves no partial
output. Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from io import StringIO
from pathlib import Path
from typing import Callable, Sequence

from . import citegraph, geo, indicators, stats, synth
from .corpus import (
    Corpus,
    CorpusError,
    JurisdictionRule,
    Office,
    TechnologyDef,
    default_europe_set,
    default_technology_defs,
    jurisdiction_filter,
    load_country_set_file,
    load_technology_defs_file,
    parse_corpus,
    serialize_corpus,
    technology_members,
)

INDICATOR_KEYS = ("sd", "sdf", "uf", "id", "idf", "rid", "ipd", "rd")


@dataclass
class RunConfig:
    """Resolved per-invocation configuration shared by the analysis commands."""

    corpus_paths: list[str]
    office: Office | None
    technologies: list[TechnologyDef]
    europe: frozenset[str]
    jurisdiction: str  # "home" | "foreign" | "none"
    ipd_mode: str
    ipd_samples: int
    seed: int | None
    out_dir: Path
    strict: bool


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path: Path, render: Callable[[StringIO], None]) -> None:
    buffer = StringIO()
    render(buffer)
    _write_atomic(path, buffer.getvalue())
    print(f"wrote {path}")


def _detect_office(path: str) -> Office:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                try:
                    office = json.loads(line).get("office")
                except (json.JSONDecodeError, AttributeError) as exc:
                    raise CorpusError(f"{path}: cannot detect office: {exc}") from exc
                try:
                    return Office(office)
                except ValueError as exc:
                    raise CorpusError(f"{path}: unknown office {office!r}") from exc
    raise CorpusError(f"{path}: empty extract, cannot detect office")


def _read_corpus(path: str, strict: bool) -> Corpus:
    office = _detect_office(path)
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_corpus(fh, office, strict=strict)
        except CorpusError as exc:
            raise CorpusError(f"{path}: {exc}") from exc


def _load_corpora(config: RunConfig) -> list[Corpus]:
    corpora = [_read_corpus(p, config.strict) for p in config.corpus_paths]
    if config.office is not None:
        corpora = [c for c in corpora if c.office is config.office]
        if not corpora:
            raise CorpusError(f"no input corpus has office {config.office.value}")
    return corpora


def _jurisdiction_rule(kind: str, office: Office) -> JurisdictionRule | None:
    if kind == "none":
        return None
    if kind == "home":
        return JurisdictionRule.HOME
    if kind == "foreign":
        return (JurisdictionRule.FOREIGN_US_IN_EP if office is Office.EP
                else JurisdictionRule.FOREIGN_EP_IN_US)
    raise CorpusError(f"unknown jurisdiction {kind!r}")


def _rd_subset(corpus: Corpus, config: RunConfig) -> Corpus:
    rule = _jurisdiction_rule(config.jurisdiction, corpus.office)
    if rule is None:
        return corpus
    return jurisdiction_filter(corpus, rule, config.europe)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    technologies = (load_technology_defs_file(args.tech_defs)
                    if args.tech_defs else default_technology_defs())
    europe = (load_country_set_file(args.europe_set)
              if args.europe_set else default_europe_set())
    if getattr(args, "ipd_mode", "auto") == "sampled" and args.seed is None:
        raise CorpusError("--ipd-mode sampled requires --seed")
    return RunConfig(
        corpus_paths=list(args.corpus),
        office=Office(args.office) if args.office else None,
        technologies=technologies,
        europe=europe,
        jurisdiction=getattr(args, "jurisdiction", "home"),
        ipd_mode=getattr(args, "ipd_mode", "auto"),
        ipd_samples=getattr(args, "ipd_samples", geo.DEFAULT_SAMPLE_COUNT),
        seed=getattr(args, "seed", None),
        out_dir=Path(args.out_dir),
        strict=args.strict,
    )


def _pick_technology(config: RunConfig, short_name: str | None) -> TechnologyDef | None:
    if short_name is None:
        return None
    for tech in config.technologies:
        if tech.short_name == short_name:
            return tech
    known = ", ".join(t.short_name for t in config.technologies)
    raise CorpusError(f"unknown technology {short_name!r} (known: {known})")


def _combined_rows(corpus: Corpus, config: RunConfig,
                   ) -> dict[str, dict[str, float | None]]:
    """Per-technology values of all eight indicators for one corpus."""
    graph = citegraph.build_graph(corpus)
    table = indicators.technology_indicator_table(corpus, graph,
                                                  config.technologies)
    rd_corpus = _rd_subset(corpus, config)
    rows: dict[str, dict[str, float | None]] = {}
    for tech in config.technologies:
        row = table.rows.get(tech.short_name)
        if row is None:
            continue
        members = technology_members(corpus, tech)
        rd_members = technology_members(rd_corpus, tech)
        mob = geo.mobility_result(members, rd_members, corpus,
                                  config.ipd_mode, config.ipd_samples,
                                  config.seed)
        rows[tech.short_name] = {
            "sd": row.sd, "sdf": row.sdf, "uf": row.uf,
            "id": row.id, "idf": row.idf, "rid": row.rid,
            "ipd": mob.ipd_km, "rd": mob.rd_km,
        }
    return rows


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_ingest_validate(args: argparse.Namespace) -> int:
    for path in args.corpus:
        corpus = _read_corpus(path, args.strict)
        graph = citegraph.build_graph(corpus)
        print(f"{path}: OK ({len(corpus)} records, office {corpus.office.value}, "
              f"{graph.n_edges} in-corpus references, "
              f"{graph.dangling_count} dangling)")
    return 0


def cmd_indicators(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    for corpus in _load_corpora(config):
        graph = citegraph.build_graph(corpus)
        table = indicators.technology_indicator_table(corpus, graph,
                                                      config.technologies)
        rd_corpus = _rd_subset(corpus, config)
        mobility: dict[str, geo.MobilityResult] = {}
        for tech in config.technologies:
            if tech.short_name not in table.rows:
                continue
            mobility[tech.short_name] = geo.mobility_result(
                technology_members(corpus, tech),
                technology_members(rd_corpus, tech),
                corpus, config.ipd_mode, config.ipd_samples, config.seed)
        office = corpus.office.value
        _emit(config.out_dir / f"indicators_{office}.csv",
              lambda out, t=table: indicators.write_indicator_csv(t, out))
        _emit(config.out_dir / f"mobility_{office}.csv",
              lambda out, m=mobility: geo.write_mobility_csv(m, out))
    return 0


def _patent_bin_values(corpus: Corpus, config: RunConfig, indicator: str,
                       ) -> tuple[list[float], list[float]]:
    """Aligned (value, reference distance) pairs over the filtered corpus."""
    subset = _rd_subset(corpus, config)
    graph = citegraph.build_graph(corpus)
    scope = citegraph.ReferenceScope.cpc_groups()
    values: list[float] = []
    responses: list[float] = []
    for record in subset:
        if indicator == "sdf":
            value = indicators.sdf_patent(record)
            if value is None or value == 0.0:
                continue  # exponential bins cover (0, 1] only
        else:
            value = indicators.idf_patent(record, graph, scope, corpus)
            if value is None:
                continue
        rd = geo.reference_distance_patent(record, corpus)
        if rd is None:
            continue
        values.append(value)
        responses.append(rd)
    if not values:
        raise CorpusError(
            f"no patent has both a defined {indicator} and a reference distance")
    return values, responses


def cmd_bins(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    for corpus in _load_corpora(config):
        office = corpus.office.value
        values, responses = _patent_bin_values(corpus, config, args.indicator)
        if args.indicator == "sdf":
            assignments, edges = stats.exponential_bins(values, args.bin_base)
        else:
            width = args.bin_width
            if width is None:
                width = 0.01 if corpus.office is Office.US else 0.02
            assignments, edges = stats.constant_bins(values, width)
        series = stats.bin_response(assignments, responses, edges)
        fit_payload = None
        if args.indicator == "idf":
            mids = [(series.bin_edges[i] + series.bin_edges[i + 1]) / 2.0
                    for i, c in enumerate(series.bin_counts) if c > 0]
            means = [m for m in series.bin_means if m is not None]
            fit = stats.fit(mids, means, stats.FitKind.LINEAR)
            fit_payload = json.dumps({
                "kind": "linear", "slope": fit.slope,
                "intercept": fit.intercept, "r_squared": fit.r_squared,
                "n_bins": fit.n,
            }, indent=2) + "\n"
        _emit(config.out_dir / f"bins_{args.indicator}_{office}.csv",
              lambda out, s=series: stats.write_bins_csv(s, out))
        if fit_payload is not None:
            path = config.out_dir / f"bins_{args.indicator}_{office}_fit.json"
            _write_atomic(path, fit_payload)
            print(f"wrote {path}")
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    exclude = frozenset(s for s in (args.exclude or "").split(",") if s)
    for corpus in _load_corpora(config):
        rows = _combined_rows(corpus, config)
        matrix = stats.correlation_matrix(rows, INDICATOR_KEYS, exclude,
                                          alpha=args.alpha, tail=args.tail)
        _emit(config.out_dir / f"correlations_{corpus.office.value}.csv",
              lambda out, m=matrix: stats.write_correlation_csv(m, out))
    return 0


def cmd_regress(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    y_name = args.y
    x_names = [s for s in args.x.split(",") if s]
    for name in [y_name] + x_names:
        if name not in INDICATOR_KEYS:
            raise CorpusError(
                f"unknown column {name!r} (known: {', '.join(INDICATOR_KEYS)})")
    exclude = frozenset(s for s in (args.exclude or "").split(",") if s)
    for corpus in _load_corpora(config):
        rows = _combined_rows(corpus, config)
        y: list[float] = []
        columns: list[list[float]] = [[] for _ in x_names]
        for tech, values in rows.items():
            if tech in exclude:
                continue
            needed = [values[y_name]] + [values[x] for x in x_names]
            if any(v is None for v in needed):
                continue
            y.append(needed[0])
            for column, value in zip(columns, needed[1:]):
                column.append(value)
        result = stats.regress(y, columns, x_names)
        office = corpus.office.value
        _emit(config.out_dir / f"regression_{office}.txt",
              lambda out, r=result: out.write(
                  stats.format_regression_text(r, y_name)))
        _emit(config.out_dir / f"regression_{office}.json",
              lambda out, r=result: stats.write_regression_json(r, y_name, out))
    return 0


def cmd_map_grid(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    tech = _pick_technology(config, args.technology)
    suffix = f"_{tech.short_name}" if tech else ""
    for corpus in _load_corpora(config):
        members = technology_members(corpus, tech) if tech else list(corpus)
        grid = geo.grid_counts(members)
        office = corpus.office.value
        _emit(config.out_dir / f"grid_{office}{suffix}.csv",
              lambda out, g=grid: geo.write_grid_csv(g, out))
        if args.svg:
            path = config.out_dir / f"grid_{office}{suffix}.svg"
            _write_atomic(path, geo.grid_svg(grid))
            print(f"wrote {path}")
    return 0


def cmd_rank_countries(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    tech = _pick_technology(config, args.technology)
    suffix = f"_{tech.short_name}" if tech else ""
    for corpus in _load_corpora(config):
        members = technology_members(corpus, tech) if tech else list(corpus)
        ranking = geo.country_ranking(members, args.top)
        _emit(config.out_dir / f"countries_{corpus.office.value}{suffix}.csv",
              lambda out, r=ranking: geo.write_ranking_csv(r, out))
    return 0


def _generator_config(args: argparse.Namespace) -> synth.GeneratorConfig:
    overrides: dict = {}
    if args.synth_config:
        with open(args.synth_config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        if "clusters" in overrides:
            overrides["clusters"] = tuple(
                synth.ClusterSpec(**c) for c in overrides["clusters"])
        if "filing_years" in overrides:
            overrides["filing_years"] = tuple(overrides["filing_years"])
        if "office" in overrides:
            overrides["office"] = Office(overrides["office"])
    if args.count is not None:
        overrides["n_records"] = args.count
    if args.office:
        overrides["office"] = Office(args.office)
    try:
        return synth.GeneratorConfig(**overrides)
    except TypeError as exc:
        raise CorpusError(f"invalid synth config: {exc}") from exc


def cmd_synth(args: argparse.Namespace) -> int:
    config = _generator_config(args)
    corpus = synth.generate_synthetic(config, args.seed)
    if args.out:
        path = Path(args.out)
    else:
        path = Path(args.out_dir) / f"synthetic_{config.office.value}.jsonl"
    _write_atomic(path, serialize_corpus(corpus))
    print(f"wrote {path} ({len(corpus)} records)")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser, corpus: bool = True) -> None:
    if corpus:
        parser.add_argument("corpus", nargs="+", help="line-delimited extract file(s)")
        parser.add_argument("--office", choices=["EP", "US"],
                            help="process only this office")
        parser.add_argument("--tech-defs", help="technology definition CSV")
        parser.add_argument("--europe-set",
                            help="file of alpha-2 codes defining Europe")
    parser.add_argument("--out-dir", default=".", help="output directory")
    parser.add_argument("--strict", action="store_true",
                        help="reject unknown extract keys")


def _add_mobility(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--jurisdiction", choices=["home", "foreign", "none"],
                        default="home",
                        help="inventor sub-selection for reference distances")
    parser.add_argument("--ipd-mode", choices=["auto", "exact", "sampled"],
                        default="auto")
    parser.add_argument("--ipd-samples", type=int,
                        default=geo.DEFAULT_SAMPLE_COUNT)
    parser.add_argument("--seed", type=int, help="seed for sampled mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patkb",
        description="Knowledge-base indicators over patent citation corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest-validate", help="parse and validate extracts")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_ingest_validate)

    p = sub.add_parser("indicators",
                       help="indicator and mobility tables per office")
    _add_common(p)
    _add_mobility(p)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("bins", help="binned reference distance vs sdf or idf")
    _add_common(p)
    _add_mobility(p)
    p.add_argument("--indicator", choices=["sdf", "idf"], required=True)
    p.add_argument("--bin-base", type=float, default=1.25,
                   help="exponential bin base for sdf")
    p.add_argument("--bin-width", type=float,
                   help="constant bin width for idf (default 0.01 US, 0.02 EP)")
    p.set_defaults(func=cmd_bins)

    p = sub.add_parser("correlate", help="pairwise indicator correlations")
    _add_common(p)
    _add_mobility(p)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--tail", choices=["two-sided", "one-sided"],
                   default="two-sided")
    p.add_argument("--exclude", help="comma list of technologies to drop")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("regress", help="OLS of one indicator on others")
    _add_common(p)
    _add_mobility(p)
    p.add_argument("--y", required=True, help="dependent column")
    p.add_argument("--x", required=True, help="comma list of predictor columns")
    p.add_argument("--exclude", help="comma list of technologies to drop")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("map-grid", help="half-degree grid counts")
    _add_common(p)
    p.add_argument("--technology", help="restrict to one technology short name")
    p.add_argument("--svg", action="store_true", help="also write an SVG heat map")
    p.set_defaults(func=cmd_map_grid)

    p = sub.add_parser("rank-countries", help="top countries by patent count")
    _add_common(p)
    p.add_argument("--technology", help="restrict to one technology short name")
    p.add_argument("--top", type=int, default=5)
    p.set_defaults(func=cmd_rank_countries)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--count", type=int, help="number of records")
    p.add_argument("--office", choices=["EP", "US"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--synth-config", help="JSON file of generator parameters")
    p.add_argument("--out", help="output extract path")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CorpusError, stats.StatsError, geo.GeoError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
