"""Great-circle distance kernels: numba @njit hot loops with a numpy fallback.

The numba backend is used when importable unless the environment variable
PATKB_NUMBA is set to one of 0/false/off/no. Both backends implement the
same contracts; `BACKEND` names the active one and `BACKENDS` exposes both
for benchmarking. Kernels are single-threaded on purpose so results do not
depend on thread count or scheduling.

All kernel inputs are float64 latitude/longitude arrays in radians.
"""

from __future__ import annotations

import math
import os
from types import SimpleNamespace

import numpy as np

EARTH_RADIUS_KM = 6371.0088  # IUGG mean Earth radius


def _numba_requested() -> bool:
    return os.environ.get("PATKB_NUMBA", "").strip().lower() not in {
        "0", "false", "off", "no"}


# --------------------------------------------------------------------------
# numpy backend
# --------------------------------------------------------------------------

def _haversine_np(lat1, lon1, lat2, lon2):
    sdlat = np.sin((lat2 - lat1) * 0.5)
    sdlon = np.sin((lon2 - lon1) * 0.5)
    h = sdlat * sdlat + np.cos(lat1) * np.cos(lat2) * sdlon * sdlon
    # clamp against rounding drift past 1 before the asin
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0)))


def haversine_many_numpy(lat1: np.ndarray, lon1: np.ndarray,
                         lat2: np.ndarray, lon2: np.ndarray) -> np.ndarray:
    """Elementwise distances in km for aligned coordinate arrays."""
    return _haversine_np(lat1, lon1, lat2, lon2)


def pairwise_stats_numpy(lat: np.ndarray, lon: np.ndarray) -> tuple[float, float, int]:
    """Mean and population std over all unordered pairs, plus the pair count.

    Row-at-a-time evaluation keeps memory at O(n).
    """
    n = lat.shape[0]
    n_pairs = n * (n - 1) // 2
    if n_pairs == 0:
        raise ValueError("need at least 2 points")
    total = 0.0
    total_sq = 0.0
    for i in range(n - 1):
        d = _haversine_np(lat[i], lon[i], lat[i + 1:], lon[i + 1:])
        total += float(np.sum(d))
        total_sq += float(np.sum(d * d))
    mean = total / n_pairs
    var = max(total_sq / n_pairs - mean * mean, 0.0)
    return mean, math.sqrt(var), n_pairs


def sampled_stats_numpy(lat: np.ndarray, lon: np.ndarray,
                        idx_a: np.ndarray, idx_b: np.ndarray) -> tuple[float, float]:
    """Mean and sample std (ddof=1) over the sampled index pairs."""
    d = _haversine_np(lat[idx_a], lon[idx_a], lat[idx_b], lon[idx_b])
    return float(d.mean()), float(d.std(ddof=1))


_NUMPY_BACKEND = SimpleNamespace(
    name="numpy",
    haversine_many=haversine_many_numpy,
    pairwise_stats=pairwise_stats_numpy,
    sampled_stats=sampled_stats_numpy,
)


# --------------------------------------------------------------------------
# numba backend
# --------------------------------------------------------------------------

def _build_numba_backend():
    from numba import njit

    radius = EARTH_RADIUS_KM

    @njit(cache=True)
    def _dist(lat1, lon1, lat2, lon2):
        sdlat = math.sin((lat2 - lat1) * 0.5)
        sdlon = math.sin((lon2 - lon1) * 0.5)
        h = sdlat * sdlat + math.cos(lat1) * math.cos(lat2) * sdlon * sdlon
        if h > 1.0:
            h = 1.0
        return 2.0 * radius * math.asin(math.sqrt(h))

    @njit(cache=True)
    def haversine_many(lat1, lon1, lat2, lon2):
        out = np.empty(lat1.shape[0], dtype=np.float64)
        for i in range(lat1.shape[0]):
            out[i] = _dist(lat1[i], lon1[i], lat2[i], lon2[i])
        return out

    @njit(cache=True)
    def _pairwise_sums(lat, lon):
        # Kahan-compensated accumulation: error stays O(eps) regardless of n
        total = 0.0
        comp = 0.0
        total_sq = 0.0
        comp_sq = 0.0
        n = lat.shape[0]
        for i in range(n - 1):
            for j in range(i + 1, n):
                d = _dist(lat[i], lon[i], lat[j], lon[j])
                y = d - comp
                t = total + y
                comp = (t - total) - y
                total = t
                y = d * d - comp_sq
                t = total_sq + y
                comp_sq = (t - total_sq) - y
                total_sq = t
        return total, total_sq

    def pairwise_stats(lat, lon):
        n = lat.shape[0]
        n_pairs = n * (n - 1) // 2
        if n_pairs == 0:
            raise ValueError("need at least 2 points")
        total, total_sq = _pairwise_sums(lat, lon)
        mean = total / n_pairs
        var = max(total_sq / n_pairs - mean * mean, 0.0)
        return mean, math.sqrt(var), n_pairs

    @njit(cache=True)
    def _sampled_sums(lat, lon, idx_a, idx_b):
        m = idx_a.shape[0]
        d = np.empty(m, dtype=np.float64)
        total = 0.0
        comp = 0.0
        for k in range(m):
            d[k] = _dist(lat[idx_a[k]], lon[idx_a[k]], lat[idx_b[k]], lon[idx_b[k]])
            y = d[k] - comp
            t = total + y
            comp = (t - total) - y
            total = t
        mean = total / m
        ssq = 0.0
        comp = 0.0
        for k in range(m):
            r = (d[k] - mean) * (d[k] - mean)
            y = r - comp
            t = ssq + y
            comp = (t - ssq) - y
            ssq = t
        return mean, ssq

    def sampled_stats(lat, lon, idx_a, idx_b):
        m = idx_a.shape[0]
        mean, ssq = _sampled_sums(lat, lon, idx_a, idx_b)
        std = math.sqrt(ssq / (m - 1)) if m > 1 else 0.0
        return mean, std

    return SimpleNamespace(
        name="numba",
        haversine_many=haversine_many,
        pairwise_stats=pairwise_stats,
        sampled_stats=sampled_stats,
    )


BACKENDS: dict[str, SimpleNamespace] = {"numpy": _NUMPY_BACKEND}

if _numba_requested():
    try:
        BACKENDS["numba"] = _build_numba_backend()
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

_ACTIVE = BACKENDS.get("numba", _NUMPY_BACKEND)
BACKEND: str = _ACTIVE.name


def haversine_many(lat1, lon1, lat2, lon2) -> np.ndarray:
    return _ACTIVE.haversine_many(lat1, lon1, lat2, lon2)


def pairwise_stats(lat, lon) -> tuple[float, float, int]:
    return _ACTIVE.pairwise_stats(lat, lon)


def sampled_stats(lat, lon, idx_a, idx_b) -> tuple[float, float]:
    return _ACTIVE.sampled_stats(lat, lon, idx_a, idx_b)
