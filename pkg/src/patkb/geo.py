"""Great-circle geography: inter-patent distance, reference distance, grids, rankings.

A patent's location is the first entry of its inventor_locations; records
without one are skipped by geographic operations and counted separately.
Distances are great circles on a sphere of radius 6371.0088 km.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from ._kernels import EARTH_RADIUS_KM
from .corpus import Corpus, PatentRecord

MAX_DISTANCE_KM = math.pi * EARTH_RADIUS_KM  # antipodal arc, ~20015.1 km

# Above this many pairs, "auto" inter-patent distance switches to sampling.
EXACT_PAIR_LIMIT = 2_000_000
DEFAULT_SAMPLE_COUNT = 1_000_000


class GeoPoint(NamedTuple):
    lat: float
    lon: float


class GeoError(ValueError):
    """Geographic operation on unsuitable input."""


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km; symmetric, zero iff the points coincide."""
    lat1, lon1 = math.radians(a.lat), math.radians(a.lon)
    lat2, lon2 = math.radians(b.lat), math.radians(b.lon)
    sdlat = math.sin((lat2 - lat1) * 0.5)
    sdlon = math.sin((lon2 - lon1) * 0.5)
    h = sdlat * sdlat + math.cos(lat1) * math.cos(lat2) * sdlon * sdlon
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(h, 1.0)))


def patent_point(patent: PatentRecord) -> GeoPoint | None:
    """First-listed inventor location, or None for unlocated records."""
    if not patent.inventor_locations:
        return None
    loc = patent.inventor_locations[0]
    return GeoPoint(loc.lat, loc.lon)


def _located_radians(patents: Iterable[PatentRecord]) -> tuple[np.ndarray, np.ndarray]:
    lats: list[float] = []
    lons: list[float] = []
    for p in patents:
        point = patent_point(p)
        if point is not None:
            lats.append(math.radians(point.lat))
            lons.append(math.radians(point.lon))
    return np.asarray(lats, dtype=np.float64), np.asarray(lons, dtype=np.float64)


@dataclass(frozen=True)
class IpdEstimate:
    mean_km: float
    std_km: float
    stderr_km: float | None  # None when computed exactly
    n_located: int
    n_pairs_total: int
    mode: str  # "exact" | "sampled"


def _decode_pair_indices(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map flat pair index k to (a, b) with 0 <= a < b, k = b(b-1)/2 + a."""
    b = ((1.0 + np.sqrt(8.0 * k.astype(np.float64) + 1.0)) * 0.5).astype(np.int64)
    b = np.where(b * (b - 1) // 2 > k, b - 1, b)
    b = np.where((b + 1) * b // 2 <= k, b + 1, b)
    a = k - b * (b - 1) // 2
    return a, b


def sample_pair_indices(n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """m unordered pairs drawn uniformly with replacement from n points.

    Philox is counter-based, so the stream is reproducible for a seed and
    could be partitioned by index range; results never depend on threading.
    """
    n_pairs = n * (n - 1) // 2
    rng = np.random.Generator(np.random.Philox(seed))
    k = rng.integers(0, n_pairs, size=m, dtype=np.int64)
    return _decode_pair_indices(k)


def inter_patent_distance(patents: Sequence[PatentRecord], mode: str = "auto",
                          samples: int = DEFAULT_SAMPLE_COUNT,
                          seed: int | None = None) -> IpdEstimate:
    """Mean pairwise great-circle distance over located patents.

    mode "exact" averages every unordered pair; "sampled" averages `samples`
    uniformly drawn pairs (seed required) and reports the standard error;
    "auto" picks exact up to EXACT_PAIR_LIMIT pairs.
    """
    lat, lon = _located_radians(patents)
    n = lat.shape[0]
    if n < 2:
        raise GeoError(f"inter-patent distance needs >= 2 located patents, got {n}")
    n_pairs = n * (n - 1) // 2
    if mode == "auto":
        mode = "exact" if n_pairs <= EXACT_PAIR_LIMIT else "sampled"
    if mode == "exact":
        mean, std, _ = _kernels.pairwise_stats(lat, lon)
        return IpdEstimate(mean, std, None, n, n_pairs, "exact")
    if mode == "sampled":
        if seed is None:
            raise GeoError("sampled inter-patent distance requires a seed")
        if samples < 2:
            raise GeoError("sampled mode needs samples >= 2")
        idx_a, idx_b = sample_pair_indices(n, samples, seed)
        mean, std = _kernels.sampled_stats(lat, lon, idx_a, idx_b)
        return IpdEstimate(mean, std, std / math.sqrt(samples), n, n_pairs, "sampled")
    raise GeoError(f"unknown ipd mode {mode!r}")


def reference_distance_patent(patent: PatentRecord, corpus: Corpus) -> float | None:
    """Mean distance from a patent to the located in-corpus patents it cites.

    None when the patent is unlocated, cites nothing in-corpus, or no cited
    patent has a location.
    """
    src = patent_point(patent)
    if src is None:
        return None
    distances = [
        haversine_km(src, dst)
        for cid in patent.cited_family_ids
        if (target := corpus.get(cid)) is not None
        and (dst := patent_point(target)) is not None
    ]
    if not distances:
        return None
    return sum(distances) / len(distances)


@dataclass(frozen=True)
class RdSummary:
    mean_km: float
    std_km: float
    defined_count: int


def reference_distance_technology(patents: Sequence[PatentRecord],
                                  corpus: Corpus) -> RdSummary:
    """Unweighted mean of defined per-patent reference distances.

    Pairs (source, cited target) are flattened into one batched kernel call;
    per-patent means come from segment reduction.
    """
    src_lat: list[float] = []
    src_lon: list[float] = []
    dst_lat: list[float] = []
    dst_lon: list[float] = []
    seg_sizes: list[int] = []
    for patent in patents:
        src = patent_point(patent)
        if src is None:
            continue
        targets = [
            dst
            for cid in patent.cited_family_ids
            if (t := corpus.get(cid)) is not None
            and (dst := patent_point(t)) is not None
        ]
        if not targets:
            continue
        seg_sizes.append(len(targets))
        for dst in targets:
            src_lat.append(math.radians(src.lat))
            src_lon.append(math.radians(src.lon))
            dst_lat.append(math.radians(dst.lat))
            dst_lon.append(math.radians(dst.lon))
    if not seg_sizes:
        raise GeoError("no patent has a defined reference distance")
    d = _kernels.haversine_many(
        np.asarray(src_lat), np.asarray(src_lon),
        np.asarray(dst_lat), np.asarray(dst_lon))
    offsets = np.zeros(len(seg_sizes), dtype=np.int64)
    offsets[1:] = np.asarray(seg_sizes[:-1], dtype=np.int64).cumsum()
    sums = np.add.reduceat(d, offsets)
    values = sums / np.asarray(seg_sizes, dtype=np.float64)
    return RdSummary(float(values.mean()), float(values.std()), len(values))


@dataclass(frozen=True)
class GridCounts:
    """Patent counts per half-degree cell, keyed by (lat_cell, lon_cell)."""

    cells: dict[tuple[float, float], int]
    unlocated: int
    resolution: float = 0.5

    @property
    def total(self) -> int:
        return sum(self.cells.values())


def grid_cell(point: GeoPoint) -> tuple[float, float]:
    return (math.floor(2.0 * point.lat) / 2.0, math.floor(2.0 * point.lon) / 2.0)


def grid_counts(patents: Iterable[PatentRecord]) -> GridCounts:
    """Assign each located patent to its half-degree cell; count the rest."""
    cells: dict[tuple[float, float], int] = {}
    unlocated = 0
    for patent in patents:
        point = patent_point(patent)
        if point is None:
            unlocated += 1
            continue
        key = grid_cell(point)
        cells[key] = cells.get(key, 0) + 1
    return GridCounts(cells=cells, unlocated=unlocated)


def country_ranking(patents: Iterable[PatentRecord], k: int) -> list[tuple[str, int]]:
    """Top-k countries by located-patent count; ties break by code ascending."""
    if k < 1:
        raise GeoError("k must be positive")
    counts: dict[str, int] = {}
    for patent in patents:
        if not patent.inventor_locations:
            continue
        country = patent.inventor_locations[0].country
        counts[country] = counts.get(country, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


@dataclass(frozen=True)
class MobilityResult:
    """Knowledge-mobility indicators of one technology (None where undefined)."""

    ipd_km: float | None
    ipd_std_km: float | None
    ipd_stderr_km: float | None
    ipd_mode: str | None
    n_located: int
    rd_km: float | None
    rd_std_km: float | None
    defined_rd_count: int


def mobility_result(patents: Sequence[PatentRecord], rd_patents: Sequence[PatentRecord],
                    corpus: Corpus, ipd_mode: str = "auto",
                    samples: int = DEFAULT_SAMPLE_COUNT,
                    seed: int | None = None) -> MobilityResult:
    """Combine ipd (over `patents`) and rd (over `rd_patents`, usually the
    jurisdiction-filtered subset) into one row."""
    n_located = sum(1 for p in patents if patent_point(p) is not None)
    if n_located >= 2:
        ipd = inter_patent_distance(patents, ipd_mode, samples, seed)
        ipd_fields = (ipd.mean_km, ipd.std_km, ipd.stderr_km, ipd.mode)
    else:
        ipd_fields = (None, None, None, None)
    try:
        rd = reference_distance_technology(rd_patents, corpus)
        rd_fields = (rd.mean_km, rd.std_km, rd.defined_count)
    except GeoError:
        rd_fields = (None, None, 0)
    return MobilityResult(*ipd_fields, n_located, *rd_fields)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _fmt(x: float | None) -> str:
    return "" if x is None else format(x, ".6g")


def write_grid_csv(grid: GridCounts, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["lat_cell", "lon_cell", "count"])
    for (lat_cell, lon_cell), count in sorted(grid.cells.items()):
        writer.writerow([format(lat_cell, ".1f"), format(lon_cell, ".1f"), count])


def write_ranking_csv(ranking: Sequence[tuple[str, int]], out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rank", "country", "count"])
    for rank, (country, count) in enumerate(ranking, start=1):
        writer.writerow([rank, country, count])


def write_mobility_csv(rows: dict[str, MobilityResult], out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["tech", "n_located", "ipd_mode", "ipd_km", "ipd_std_km",
                     "ipd_stderr_km", "rd_km", "rd_std_km", "defined_rd_count"])
    for tech, row in rows.items():
        writer.writerow([
            tech, row.n_located, row.ipd_mode or "",
            _fmt(row.ipd_km), _fmt(row.ipd_std_km), _fmt(row.ipd_stderr_km),
            _fmt(row.rd_km), _fmt(row.rd_std_km), row.defined_rd_count,
        ])


_SVG_LOW = (255, 237, 160)
_SVG_HIGH = (128, 0, 38)


def _cell_color(count: int, max_count: int) -> str:
    t = math.log(count) / math.log(max_count) if max_count > 1 else 1.0
    rgb = tuple(round(lo + (hi - lo) * t) for lo, hi in zip(_SVG_LOW, _SVG_HIGH))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def grid_svg(grid: GridCounts) -> str:
    """Standalone world heat map; cell shading is logarithmic in the count."""
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 720 360" '
        'width="720" height="360">',
        '<rect x="0" y="0" width="720" height="360" fill="#ffffff"/>',
    ]
    max_count = max(grid.cells.values(), default=0)
    for (lat_cell, lon_cell), count in sorted(grid.cells.items()):
        x = (lon_cell + 180.0) * 2.0
        y = (90.0 - (lat_cell + 0.5)) * 2.0
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="1" height="1" '
            f'fill="{_cell_color(count, max_count)}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
