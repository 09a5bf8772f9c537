"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.
"""

from __future__ import annotations

import hashlib
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from patkb.citegraph import ReferenceScope, build_graph
from patkb.corpus import (
    JurisdictionRule,
    Office,
    default_europe_set,
    jurisdiction_filter,
    technology_members,
)
from patkb.geo import (
    GeoError,
    GeoPoint,
    haversine_km,
    inter_patent_distance,
    patent_point,
    reference_distance_technology,
)
from patkb.indicators import IndicatorRow, technology_row
from patkb.stats import constant_bins, correlation_matrix, exponential_bins, \
    pearson_test, regress
from patkb.synth import GeneratorConfig, generate_synthetic

import oracles
from conftest import SYNTH_TECHS
from ret_reference import reference_rows

pytestmark = pytest.mark.acceptance


def report(name: str, passed: bool) -> None:
    print(f"[ACCEPTANCE] {name}: {'PASS' if passed else 'FAIL'}")


def close(a: float | None, b: float | None, rel: float = 1e-12) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)


# --------------------------------------------------------------------------
# 1. oracle equivalence on 50 synthetic corpora
# --------------------------------------------------------------------------

def _implementation_eight(members, corpus, graph, tech, europe):
    row = technology_row(members, graph, ReferenceScope.for_technology(tech),
                         corpus)
    located = [p for p in members if patent_point(p) is not None]
    ipd = (inter_patent_distance(members, "exact").mean_km
           if len(located) >= 2 else None)
    home = jurisdiction_filter(corpus, JurisdictionRule.HOME, europe)
    rd_members = [m for m in members if m.family_id in home.records]
    try:
        rd = reference_distance_technology(rd_members, corpus).mean_km
    except GeoError:
        rd = None
    return row, {
        "sd": row.sd, "sdf": row.sdf, "uf": row.uf, "id": row.id,
        "idf": row.idf, "rid": row.rid, "ipd": ipd, "rd": rd,
    }


def test_oracle_equivalence_50_corpora():
    start = time.perf_counter()
    europe = default_europe_set()
    compared = 0
    rid_checked = 0
    try:
        for seed in range(50):
            office = Office.EP if seed % 2 == 0 else Office.US
            config = GeneratorConfig(n_records=120 + (seed % 5) * 20,
                                     office=office)
            corpus = generate_synthetic(config, seed)
            assert len(corpus) <= 200
            graph = build_graph(corpus)
            by_id = dict(corpus.records)
            for tech in SYNTH_TECHS:
                members = technology_members(corpus, tech)
                if not members:
                    continue
                row, impl = _implementation_eight(members, corpus, graph,
                                                  tech, europe)
                expected = oracles.all_eight(members, by_id, tech.cpc_prefixes,
                                             office.value, europe)
                for key in ("sd", "sdf", "uf", "id", "idf", "rid", "ipd", "rd"):
                    assert close(impl[key], expected[key]), (
                        seed, tech.short_name, key, impl[key], expected[key])
                    compared += 1
                # rid consistency: bitwise identity of the defining quotient
                assert row.rid == row.id / row.n_patents
                rid_checked += 1
        elapsed = time.perf_counter() - start
        assert compared >= 1000
        assert rid_checked >= 150
        assert elapsed < 60.0, f"oracle suite took {elapsed:.1f}s"
    except BaseException:
        report("oracle-equivalence-8-indicators-1e-12", False)
        raise
    report("oracle-equivalence-8-indicators-1e-12", True)


def test_rid_spot_value_on_mock_row():
    try:
        n_patents, id_mean = 31490, 7.09
        row = IndicatorRow(
            n_patents=n_patents, sd=3.12, sd_std=13.51, sdf=None, sdf_std=None,
            sdf_defined=0, uf=0.0, uf_std=0.0, id=id_mean, id_std=19.53,
            idf=None, idf_std=None, idf_defined=0, rid=id_mean / n_patents)
        assert row.rid == row.id / row.n_patents
        assert row.rid == pytest.approx(2.2515e-4, rel=1e-4)
        assert row.rid * row.n_patents == pytest.approx(row.id, rel=1e-15)
    except BaseException:
        report("rid-consistency-spot-value", False)
        raise
    report("rid-consistency-spot-value", True)


# --------------------------------------------------------------------------
# 2. geometry
# --------------------------------------------------------------------------

def test_geometry_antipodal_symmetry_and_oracle():
    try:
        antipodal = haversine_km(GeoPoint(0.0, 0.0), GeoPoint(0.0, -180.0))
        assert abs(antipodal - 20015.1) < 0.1
        rng = np.random.default_rng(2024)
        for _ in range(20):
            a = GeoPoint(float(rng.uniform(-90, 90)),
                         float(rng.uniform(-180, 180)))
            b = GeoPoint(float(rng.uniform(-90, 90)),
                         float(rng.uniform(-180, 180)))
            assert haversine_km(a, b) == haversine_km(b, a)
            expected = oracles.great_circle_mp(a.lat, a.lon, b.lat, b.lon)
            assert abs(haversine_km(a, b) - expected) < 0.5
    except BaseException:
        report("geometry-antipodal-symmetry-cross-check", False)
        raise
    report("geometry-antipodal-symmetry-cross-check", True)


# --------------------------------------------------------------------------
# 3. sampled inter-patent distance converges
# --------------------------------------------------------------------------

def test_sampled_ipd_within_three_stderr():
    start = time.perf_counter()
    try:
        config = GeneratorConfig(n_records=500, located_rate=1.0)
        corpus = generate_synthetic(config, seed=424242)
        records = list(corpus)
        exact = inter_patent_distance(records, "exact").mean_km
        hits = 0
        for seed in range(100):
            est = inter_patent_distance(records, "sampled",
                                        samples=1_000_000, seed=seed)
            assert est.stderr_km is not None
            if abs(est.mean_km - exact) < 3.0 * est.stderr_km:
                hits += 1
        elapsed = time.perf_counter() - start
        assert hits >= 99, f"only {hits}/100 seeds within 3 stderr"
        assert elapsed < 120.0, f"sampled-ipd suite took {elapsed:.1f}s"
    except BaseException:
        report("sampled-ipd-99-of-100-seeds", False)
        raise
    report("sampled-ipd-99-of-100-seeds", True)


# --------------------------------------------------------------------------
# 4. regression diagnostics
# --------------------------------------------------------------------------

def test_regression_matches_normal_equation_oracle():
    try:
        rng = np.random.default_rng(1234)
        x1 = (rng.random(13) * 0.5).tolist()
        x2 = (rng.random(13) * 3e-4).tolist()
        y = [4700 + 8500 * a - 2.2e5 * b + e
             for a, b, e in zip(x1, x2, rng.normal(0, 400, 13))]
        result = regress(y, [x1, x2], ["sdf", "rid"])
        expected = oracles.ols(y, [x1, x2])
        for got, want in zip(result.coefficients, expected["coefficients"]):
            assert math.isclose(got, want, rel_tol=1e-8)
        for got, want in zip(result.std_errors, expected["std_errors"]):
            assert math.isclose(got, want, rel_tol=1e-8)
        assert math.isclose(result.r_squared, expected["r_squared"],
                            rel_tol=1e-8)
        assert math.isclose(result.adjusted_r_squared,
                            expected["adjusted_r_squared"], rel_tol=1e-8)
        assert math.isclose(result.residual_std_error,
                            expected["residual_std_error"], rel_tol=1e-8)
        assert math.isclose(result.f_statistic, expected["f_statistic"],
                            rel_tol=1e-8)
        assert result.df_resid == expected["df_resid"]

        # exact plane: R^2 = 1, residual std error = 0
        y_exact = [2.0 * a - 3.0 * b + 1.0 for a, b in zip(x1, x2)]
        exact = regress(y_exact, [x1, x2], ["sdf", "rid"])
        assert exact.r_squared == pytest.approx(1.0, abs=1e-12)
        assert exact.residual_std_error == pytest.approx(0.0, abs=1e-9)
    except BaseException:
        report("regression-diagnostics-1e-8", False)
        raise
    report("regression-diagnostics-1e-8", True)


# --------------------------------------------------------------------------
# 5. significance boundary at n = 13
# --------------------------------------------------------------------------

def _sample_with_correlation(r: float, n: int = 13):
    x = np.arange(1.0, n + 1)
    x -= x.mean()
    x /= np.linalg.norm(x)
    z = np.arange(1.0, n + 1) ** 2
    z -= z.mean()
    e = z - (z @ x) * x
    e /= np.linalg.norm(e)
    y = r * x + math.sqrt(1.0 - r * r) * e
    return x.tolist(), y.tolist()


def test_significance_boundary_by_bisection():
    try:
        def significant(r: float) -> bool:
            x, y = _sample_with_correlation(r)
            return pearson_test(x, y, alpha=0.1, tail="two-sided").significant

        lo, hi = 0.3, 0.7
        assert not significant(lo) and significant(hi)
        for _ in range(40):
            mid = (lo + hi) / 2.0
            if significant(mid):
                hi = mid
            else:
                lo = mid
        flip = (lo + hi) / 2.0
        t_crit = oracles.t_critical(0.05, 11)
        r_star = t_crit / math.sqrt(11 + t_crit ** 2)
        assert r_star == pytest.approx(0.476, abs=1e-3)
        assert abs(flip - r_star) < 0.001, (flip, r_star)
    except BaseException:
        report("significance-boundary-r-0.476", False)
        raise
    report("significance-boundary-r-0.476", True)


# --------------------------------------------------------------------------
# 6. sign structure on the published reference table
# --------------------------------------------------------------------------

def test_sign_structure_on_reference_table():
    try:
        for office in ("EP", "US"):
            rows = reference_rows(office)
            labels = ["sd", "id", "rid", "ipd", "rd"]
            matrix = correlation_matrix(rows, labels,
                                        exclude={"non_fossil_fuels"})
            idx = {name: i for i, name in enumerate(matrix.labels)}
            assert matrix.n[idx["sd"]][idx["ipd"]] == 13

            def r(a: str, b: str) -> float:
                return matrix.r[idx[a]][idx[b]]

            # analyticity correlates positively with mobility
            assert r("sd", "ipd") > 0, office
            assert r("sd", "rd") > 0, office
            # cumulativeness correlates negatively with mobility
            assert r("id", "ipd") < 0, office
            assert r("id", "rd") < 0, office
            assert r("rid", "ipd") < 0, office
            assert r("rid", "rd") < 0, office
    except BaseException:
        report("reference-table-sign-structure", False)
        raise
    report("reference-table-sign-structure", True)


# --------------------------------------------------------------------------
# 7. binning conventions
# --------------------------------------------------------------------------

def test_binning_conventions_and_conservation():
    try:
        rng = np.random.default_rng(7)
        values = (1.0 - rng.random(5000)).tolist() + [1.0]
        assignments, edges = exponential_bins(values, base=1.25)
        assert len(assignments) == len(values)
        top = assignments[-1]
        assert edges[top] == pytest.approx(0.8)
        assert edges[top + 1] == 1.0

        values_c = rng.random(5000).tolist() + [1.0]
        assignments_c, edges_c = constant_bins(values_c, width=0.01)
        assert len(assignments_c) == len(values_c)
        assert assignments_c[-1] == len(edges_c) - 2 == 99
    except BaseException:
        report("binning-conventions", False)
        raise
    report("binning-conventions", True)


# --------------------------------------------------------------------------
# 8. end-to-end CLI determinism, including across thread counts
# --------------------------------------------------------------------------

_DRIVER = """
import sys
from patkb.cli import main

out = sys.argv[1]
extract = out + "/synthetic_EP.jsonl"
commands = [
    ["synth", "--count", "160", "--seed", "7", "--office", "EP",
     "--out", extract],
    ["ingest-validate", extract, "--strict"],
    ["indicators", extract, "--ipd-mode", "sampled", "--seed", "5",
     "--ipd-samples", "20000", "--out-dir", out],
    ["bins", extract, "--indicator", "sdf", "--out-dir", out],
    ["bins", extract, "--indicator", "idf", "--out-dir", out],
    ["correlate", extract, "--ipd-mode", "sampled", "--seed", "5",
     "--ipd-samples", "20000", "--out-dir", out],
    ["regress", extract, "--y", "ipd", "--x", "sdf,rid", "--ipd-mode",
     "sampled", "--seed", "5", "--ipd-samples", "20000", "--out-dir", out],
    ["map-grid", extract, "--svg", "--out-dir", out],
    ["rank-countries", extract, "--top", "5", "--out-dir", out],
]
for argv in commands:
    code = main(argv)
    if code != 0:
        raise SystemExit(f"command {argv} exited {code}")
"""


def _run_pipeline(out_dir: Path, threads: str) -> dict[str, str]:
    env = dict(os.environ)
    env["NUMBA_NUM_THREADS"] = threads
    env["OMP_NUM_THREADS"] = threads
    out_dir.mkdir(parents=True)
    proc = subprocess.run(
        [sys.executable, "-c", _DRIVER, str(out_dir)],
        capture_output=True, text=True, env=env, timeout=600)
    assert proc.returncode == 0, proc.stderr
    digests = {}
    for path in sorted(out_dir.rglob("*")):
        if path.is_file():
            digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


def test_cli_end_to_end_determinism(tmp_path):
    try:
        first = _run_pipeline(tmp_path / "run1", threads="1")
        second = _run_pipeline(tmp_path / "run2", threads="1")
        other_threads = _run_pipeline(tmp_path / "run3", threads="2")
        assert len(first) >= 11
        assert first == second, "reruns differ"
        assert first == other_threads, "thread count changed artifacts"
    except BaseException:
        report("cli-end-to-end-determinism", False)
        raise
    report("cli-end-to-end-determinism", True)
