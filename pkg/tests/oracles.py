"""Independent naive recomputations used as test oracles.

Everything here is deliberately written from scratch against the definitions:
pure-Python loops, math/fsum arithmetic, regex prefix matching, Gauss-Jordan
normal equations, and mpmath special functions. Nothing calls the library's
computation paths; record dataclasses are used for field access only.
"""

from __future__ import annotations

import math
import re
from math import fsum

import mpmath as mp

EARTH_RADIUS_KM = 6371.0088


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------

def haversine(lat1, lon1, lat2, lon2):
    """Great-circle km from degree coordinates (scalar math module)."""
    p1, l1, p2, l2 = map(math.radians, (lat1, lon1, lat2, lon2))
    h = (math.sin((p2 - p1) / 2.0) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin((l2 - l1) / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def great_circle_mp(lat1, lon1, lat2, lon2, dps=50):
    """High-precision distance via the atan2 central-angle formula (mpmath)."""
    with mp.workdps(dps):
        p1, l1, p2, l2 = [mp.mpf(v) * mp.pi / 180 for v in (lat1, lon1, lat2, lon2)]
        dl = l2 - l1
        num = mp.sqrt((mp.cos(p2) * mp.sin(dl)) ** 2
                      + (mp.cos(p1) * mp.sin(p2)
                         - mp.sin(p1) * mp.cos(p2) * mp.cos(dl)) ** 2)
        den = mp.sin(p1) * mp.sin(p2) + mp.cos(p1) * mp.cos(p2) * mp.cos(dl)
        return float(mp.mpf(EARTH_RADIUS_KM) * mp.atan2(num, den))


def point_of(record):
    if not record.inventor_locations:
        return None
    loc = record.inventor_locations[0]
    return (loc.lat, loc.lon)


def ipd_exact(records):
    """Mean over all unordered located pairs, fsum accumulation; None if < 2."""
    points = [p for r in records if (p := point_of(r)) is not None]
    if len(points) < 2:
        return None
    distances = [
        haversine(points[i][0], points[i][1], points[j][0], points[j][1])
        for i in range(len(points) - 1)
        for j in range(i + 1, len(points))
    ]
    return fsum(distances) / len(distances)


def rd_patent(record, by_id):
    src = point_of(record)
    if src is None:
        return None
    distances = []
    for cid in record.cited_family_ids:
        target = by_id.get(cid)
        if target is None:
            continue
        dst = point_of(target)
        if dst is None:
            continue
        distances.append(haversine(src[0], src[1], dst[0], dst[1]))
    if not distances:
        return None
    return fsum(distances) / len(distances)


def rd_technology(records, by_id):
    values = [v for r in records if (v := rd_patent(r, by_id)) is not None]
    return fsum(values) / len(values) if values else None


# --------------------------------------------------------------------------
# CPC matching and citation counting
# --------------------------------------------------------------------------

def norm_code(code):
    return re.sub(r"\s+", " ", code.strip().upper())


def matches(record, prefixes):
    """Regex-based prefix matching oracle."""
    patterns = [re.compile("^" + re.escape(norm_code(p))) for p in prefixes]
    return any(pat.match(norm_code(c)) for c in record.cpc_codes for pat in patterns)


def group_of(code):
    m = re.match(r"^([^/]*/.)", norm_code(code))
    return m.group(1) if m else norm_code(code)


def internal_count_technology(record, by_id, prefixes):
    return sum(
        1 for cid in record.cited_family_ids
        if cid in by_id and matches(by_id[cid], prefixes)
    )


def internal_count_group(record, by_id):
    own = {group_of(c) for c in record.cpc_codes}
    count = 0
    for cid in record.cited_family_ids:
        target = by_id.get(cid)
        if target is None:
            continue
        if any(group_of(c) in own for c in target.cpc_codes):
            count += 1
    return count


def in_corpus_cited(record, by_id):
    return [cid for cid in record.cited_family_ids if cid in by_id]


# --------------------------------------------------------------------------
# indicators
# --------------------------------------------------------------------------

def sd(records):
    return fsum(r.npl_scientific for r in records) / len(records)


def sdf(records):
    values = []
    for r in records:
        denom = len(r.cited_family_ids) + r.npl_total
        if denom > 0:
            values.append(r.npl_scientific / denom)
    return fsum(values) / len(values) if values else None


def uf(records):
    return sum(1 for r in records if "UNIVERSITY" in r.sectors) / len(records)


def id_technology(records, by_id, prefixes):
    counts = [internal_count_technology(r, by_id, prefixes) for r in records]
    return fsum(counts) / len(counts)


def idf_technology(records, by_id, prefixes):
    values = []
    for r in records:
        cited = in_corpus_cited(r, by_id)
        if cited:
            values.append(internal_count_technology(r, by_id, prefixes) / len(cited))
    return fsum(values) / len(values) if values else None


def rid(records, by_id, prefixes):
    return id_technology(records, by_id, prefixes) / len(records)


def home_subset(records, office, europe):
    wanted = europe if office == "EP" else {"US"}
    return [r for r in records
            if any(loc.country in wanted for loc in r.inventor_locations)]


def all_eight(members, by_id, prefixes, office, europe):
    """The eight technology indicators per their definitions, or None."""
    rd_members = home_subset(members, office, europe)
    return {
        "sd": sd(members),
        "sdf": sdf(members),
        "uf": uf(members),
        "id": id_technology(members, by_id, prefixes),
        "idf": idf_technology(members, by_id, prefixes),
        "rid": rid(members, by_id, prefixes),
        "ipd": ipd_exact(members),
        "rd": rd_technology(rd_members, by_id),
    }


# --------------------------------------------------------------------------
# statistics
# --------------------------------------------------------------------------

def pearson_r(x, y):
    n = len(x)
    mx = fsum(x) / n
    my = fsum(y) / n
    sxy = fsum((x[i] - mx) * (y[i] - my) for i in range(n))
    sxx = fsum((v - mx) ** 2 for v in x)
    syy = fsum((v - my) ** 2 for v in y)
    return sxy / math.sqrt(sxx * syy)


def t_sf(t, df, dps=40):
    """P(T > t) for Student t via the regularized incomplete beta."""
    with mp.workdps(dps):
        x = mp.mpf(df) / (df + mp.mpf(t) ** 2)
        tail = mp.betainc(mp.mpf(df) / 2, mp.mpf("0.5"), 0, x, regularized=True) / 2
        return float(tail if t >= 0 else 1 - tail)


def t_critical(alpha_half, df, dps=40):
    """t with P(T > t) = alpha_half, solved on the mpmath CDF."""
    with mp.workdps(dps):
        t = mp.findroot(lambda v: mp.betainc(mp.mpf(df) / 2, mp.mpf("0.5"), 0,
                                             df / (df + v * v),
                                             regularized=True) / 2 - alpha_half,
                        mp.mpf(2))
        return float(t)


def _gauss_jordan_inverse(matrix):
    p = len(matrix)
    aug = [list(row) + [1.0 if i == j else 0.0 for j in range(p)]
           for i, row in enumerate(matrix)]
    for col in range(p):
        pivot = max(range(col, p), key=lambda r: abs(aug[r][col]))
        if abs(aug[pivot][col]) == 0.0:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = aug[col][col]
        aug[col] = [v / scale for v in aug[col]]
        for row in range(p):
            if row == col:
                continue
            factor = aug[row][col]
            if factor != 0.0:
                aug[row] = [a - factor * b for a, b in zip(aug[row], aug[col])]
    return [row[p:] for row in aug]


def ols(y, columns):
    """Normal-equation OLS with intercept appended; classical diagnostics."""
    n = len(y)
    k = len(columns)
    cols = [list(c) for c in columns] + [[1.0] * n]
    p = k + 1
    xtx = [[fsum(cols[i][r] * cols[j][r] for r in range(n)) for j in range(p)]
           for i in range(p)]
    xty = [fsum(cols[i][r] * y[r] for r in range(n)) for i in range(p)]
    inv = _gauss_jordan_inverse(xtx)
    beta = [fsum(inv[i][j] * xty[j] for j in range(p)) for i in range(p)]
    fitted = [fsum(cols[j][r] * beta[j] for j in range(p)) for r in range(n)]
    residuals = [y[r] - fitted[r] for r in range(n)]
    rss = fsum(e * e for e in residuals)
    mean_y = fsum(y) / n
    tss = fsum((v - mean_y) ** 2 for v in y)
    df = n - p
    sigma_sq = rss / df
    return {
        "coefficients": beta,
        "std_errors": [math.sqrt(sigma_sq * inv[i][i]) for i in range(p)],
        "r_squared": 1.0 - rss / tss,
        "adjusted_r_squared": 1.0 - (rss / tss) * (n - 1) / df,
        "residual_std_error": math.sqrt(sigma_sq),
        "df_resid": df,
        "f_statistic": ((tss - rss) / k) / sigma_sq if rss > 0 else math.inf,
    }
