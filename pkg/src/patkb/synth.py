"""Seeded synthetic corpus generation for tests and benchmarks.

generate_synthetic is a pure function of (config, seed): equal inputs give
byte-identical corpora, and every generated corpus passes parse_corpus
validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, CorpusError, Location, Office, PatentRecord


class GeneratorConfigError(CorpusError):
    """The generator parameters cannot produce a valid corpus."""


@dataclass(frozen=True)
class ClusterSpec:
    """A geographic sampling cluster: locations are drawn around (lat, lon)."""

    country: str
    lat: float
    lon: float
    spread_deg: float = 1.0
    weight: float = 1.0
    region: str | None = None


DEFAULT_CLUSTERS: tuple[ClusterSpec, ...] = (
    ClusterSpec("DE", 48.14, 11.58, 1.2, 3.0, "Bayern"),
    ClusterSpec("DE", 52.52, 13.40, 1.0, 2.0),
    ClusterSpec("US", 37.39, -122.08, 1.5, 4.0, "California"),
    ClusterSpec("US", 42.36, -71.06, 1.2, 2.5),
    ClusterSpec("JP", 35.68, 139.69, 0.8, 3.0, "Tokyo"),
    ClusterSpec("FR", 48.85, 2.35, 1.0, 1.5),
    ClusterSpec("DK", 56.16, 10.20, 0.8, 1.0),
    ClusterSpec("NL", 52.01, 4.36, 0.5, 1.0),
    ClusterSpec("CH", 47.38, 8.54, 0.5, 1.0),
    ClusterSpec("KR", 37.57, 126.98, 0.8, 1.5),
)

DEFAULT_TECHNOLOGY_MIX: dict[str, float] = {
    "Y02E 10/5": 3.0,   # photovoltaics-like
    "Y02E 10/7": 2.0,   # wind-like
    "Y02E 60/5": 1.5,   # fuel-cell-like
    "Y02C": 1.0,        # capture-like
}


@dataclass(frozen=True)
class GeneratorConfig:
    n_records: int = 100
    office: Office = Office.EP
    technology_mix: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_TECHNOLOGY_MIX))
    extra_cpc_rate: float = 0.3
    citations_per_record: float = 2.0
    dangling_rate: float = 0.1
    npl_total_mean: float = 1.5
    npl_scientific_rate: float = 0.5
    university_rate: float = 0.1
    located_rate: float = 0.9
    max_locations: int = 3
    clusters: Sequence[ClusterSpec] = DEFAULT_CLUSTERS
    filing_years: tuple[int, int] = (1990, 2019)

    def validate(self) -> None:
        if self.n_records < 0:
            raise GeneratorConfigError("n_records must be non-negative")
        for name in ("extra_cpc_rate", "dangling_rate", "npl_scientific_rate",
                     "university_rate", "located_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise GeneratorConfigError(f"{name} must be in [0, 1]")
        if self.citations_per_record < 0 or self.npl_total_mean < 0:
            raise GeneratorConfigError("rates must be non-negative")
        if self.max_locations < 1:
            raise GeneratorConfigError("max_locations must be >= 1")
        if not self.technology_mix:
            raise GeneratorConfigError("technology_mix is empty")
        if not self.clusters:
            raise GeneratorConfigError("clusters is empty")
        if (self.n_records < 2 and self.citations_per_record > 0
                and self.dangling_rate <= 0):
            # the only in-corpus citation target would be the record itself
            raise GeneratorConfigError(
                "citation density requires in-corpus targets but n_records < 2 "
                "and dangling_rate is 0 (would force self-citation)")
        if self.filing_years[0] > self.filing_years[1]:
            raise GeneratorConfigError("filing_years range is inverted")


def _weighted_index(rng: np.random.Generator, weights: np.ndarray) -> int:
    return int(rng.choice(len(weights), p=weights))


def _make_code(rng: np.random.Generator, prefix: str) -> str:
    if "/" in prefix:
        return prefix + str(int(rng.integers(0, 100)))
    group = int(rng.integers(1, 10)) * 10
    sub = int(rng.integers(0, 100))
    return f"{prefix} {group}/{sub:02d}"


def _wrap_lon(lon: float) -> float:
    lon = ((lon + 180.0) % 360.0) - 180.0
    lon = round(lon, 4)
    return lon - 360.0 if lon >= 180.0 else lon


def generate_synthetic(config: GeneratorConfig, seed: int) -> Corpus:
    """Generate a deterministic validated corpus from (config, seed)."""
    config.validate()
    rng = np.random.default_rng(seed)

    prefixes = list(config.technology_mix)
    mix = np.array([config.technology_mix[p] for p in prefixes], dtype=float)
    if (mix < 0).any() or mix.sum() <= 0:
        raise GeneratorConfigError("technology_mix weights must be positive")
    mix = mix / mix.sum()

    cluster_w = np.array([c.weight for c in config.clusters], dtype=float)
    if (cluster_w < 0).any() or cluster_w.sum() <= 0:
        raise GeneratorConfigError("cluster weights must be positive")
    cluster_w = cluster_w / cluster_w.sum()

    family_ids = [f"FAM{i:06d}" for i in range(config.n_records)]
    records: dict[str, PatentRecord] = {}
    n_external = 0

    for i, fid in enumerate(family_ids):
        codes = [_make_code(rng, prefixes[_weighted_index(rng, mix)])]
        if rng.random() < config.extra_cpc_rate:
            extra = _make_code(rng, prefixes[_weighted_index(rng, mix)])
            if extra not in codes:
                codes.append(extra)

        cited: list[str] = []
        for _ in range(int(rng.poisson(config.citations_per_record))):
            if rng.random() < config.dangling_rate:
                cited.append(f"EXT{n_external:06d}")
                n_external += 1
            elif i > 0:
                cited.append(family_ids[int(rng.integers(0, i))])
            # no earlier record to cite: the draw is dropped
        cited = list(dict.fromkeys(cited))

        npl_total = int(rng.poisson(config.npl_total_mean))
        npl_scientific = int(rng.binomial(npl_total, config.npl_scientific_rate)) \
            if npl_total > 0 else 0

        sectors = {"COMPANY"}
        if rng.random() < config.university_rate:
            sectors.add("UNIVERSITY")

        locations: list[Location] = []
        if rng.random() < config.located_rate:
            n_loc = 1 + int(rng.integers(0, config.max_locations))
            for _ in range(n_loc):
                cl = config.clusters[_weighted_index(rng, cluster_w)]
                lat = round(float(np.clip(cl.lat + rng.normal(0.0, cl.spread_deg),
                                          -90.0, 90.0)), 4)
                lon = _wrap_lon(cl.lon + float(rng.normal(0.0, cl.spread_deg)))
                locations.append(Location(lat, lon, cl.country, cl.region))

        records[fid] = PatentRecord(
            family_id=fid,
            office=config.office,
            filing_year=int(rng.integers(config.filing_years[0],
                                         config.filing_years[1] + 1)),
            cpc_codes=tuple(codes),
            cited_family_ids=tuple(cited),
            npl_total=npl_total,
            npl_scientific=npl_scientific,
            sectors=frozenset(sectors),
            inventor_locations=tuple(locations),
        )

    return Corpus(office=config.office, records=records)
