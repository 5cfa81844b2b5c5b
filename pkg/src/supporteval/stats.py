"""Statistical engine: variance test, heteroscedastic ANOVA, post-hoc
pairwise comparison, effect sizes, and rank assignment.

All test statistics are computed from first principles here; only the
special functions (regularized incomplete beta, normal CDF) and the
Gauss-Legendre nodes come from scipy/numpy. The studentized range CDF
has no closed form and is evaluated by double numerical integration:
an outer Gauss-Legendre rule (160 nodes) over the studentizing chi
factor and an inner rule (128 nodes, z in [-8, 8]) over the normal
range integrand.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.special import betainc, ndtr

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

_INNER_NODES = 128
_OUTER_NODES = 160
_Z_LIMIT = 8.0
_INFINITE_DF = 1e8


@dataclass(frozen=True)
class MetricSample:
    """Per-response metric values for one (model, metric) cell."""

    model_id: str
    metric_id: str
    orientation: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.orientation not in (HIGHER_BETTER, LOWER_BETTER):
            raise ValueError(f"unknown orientation: {self.orientation!r}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite values in sample {self.model_id}/{self.metric_id}")


@dataclass(frozen=True)
class PairwiseResult:
    """One Games-Howell comparison; mean_diff and hedges_g are a minus b."""

    model_a: str
    model_b: str
    mean_diff: float
    p_value: float
    hedges_g: float
    significant: bool
    df: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class RankCell:
    """Rank plus signed win-loss scores for one model on one metric.

    raw_score counts significantly-greater-mean wins minus losses;
    oriented_score flips the sign for lower-is-better metrics so that
    positive always means better.
    """

    rank: int
    raw_score: int
    oriented_score: int


def _check_groups(groups: list[np.ndarray], min_k: int = 2) -> list[np.ndarray]:
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < min_k:
        raise ValueError(f"need at least {min_k} groups, got {len(arrays)}")
    for i, g in enumerate(arrays):
        if g.ndim != 1 or g.size < 2:
            raise ValueError(f"group {i} needs at least 2 one-dimensional observations")
    return arrays


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail of the F distribution via the regularized incomplete beta."""
    if f <= 0:
        return 1.0
    x = df2 / (df2 + df1 * f)
    return float(betainc(df2 / 2.0, df1 / 2.0, x))


def levene(groups: list[np.ndarray]) -> dict[str, float]:
    """Mean-centered Levene W with an F(k-1, N-k) reference distribution.

    When the absolute deviations carry no variance at all the test is
    undefined; per contract this degenerates to p = 1 with a warning.
    """
    arrays = _check_groups(groups)
    k = len(arrays)
    n_total = sum(g.size for g in arrays)
    z_groups = [np.abs(g - g.mean()) for g in arrays]
    z_means = [z.mean() for z in z_groups]
    grand = sum(z.sum() for z in z_groups) / n_total
    numerator = sum(z.size * (m - grand) ** 2 for z, m in zip(z_groups, z_means))
    denominator = sum(((z - m) ** 2).sum() for z, m in zip(z_groups, z_means))
    if denominator == 0.0:
        warnings.warn("Levene degenerate: zero variance of absolute deviations", RuntimeWarning)
        return {"statistic": 0.0, "p_value": 1.0}
    w = (n_total - k) / (k - 1) * numerator / denominator
    return {"statistic": float(w), "p_value": f_sf(w, k - 1, n_total - k)}


def welch_anova(groups: list[np.ndarray]) -> dict[str, float]:
    """Welch's heteroscedastic one-way ANOVA (the 1951 F* statistic).

    Weights are n_i / s_i^2; df2 follows Welch's formula. Raises for a
    zero-variance group, where the weights are undefined.
    """
    arrays = _check_groups(groups)
    k = len(arrays)
    ns = np.array([g.size for g in arrays], dtype=float)
    means = np.array([g.mean() for g in arrays])
    variances = np.array([g.var(ddof=1) for g in arrays])
    if np.any(variances <= 0.0):
        raise ValueError("Welch undefined: a group has zero variance")
    w = ns / variances
    w_total = w.sum()
    grand = (w * means).sum() / w_total
    a = (w * (means - grand) ** 2).sum() / (k - 1)
    hsum = (((1.0 - w / w_total) ** 2) / (ns - 1.0)).sum()
    f_star = a / (1.0 + 2.0 * (k - 2.0) / (k * k - 1.0) * hsum)
    df1 = float(k - 1)
    df2 = (k * k - 1.0) / (3.0 * hsum)
    return {
        "F": float(f_star),
        "df1": df1,
        "df2": float(df2),
        "p_value": f_sf(float(f_star), df1, float(df2)),
    }


def hedges_g(a: np.ndarray, b: np.ndarray) -> float:
    """Bias-corrected standardized mean difference,
    J * (mean_a - mean_b) / s_pooled with J = 1 - 3 / (4(n_a + n_b) - 9).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("hedges_g needs at least 2 observations per group")
    n_a, n_b = a.size, b.size
    pooled_var = ((n_a - 1) * a.var(ddof=1) + (n_b - 1) * b.var(ddof=1)) / (n_a + n_b - 2)
    if pooled_var <= 0.0:
        raise ValueError("hedges_g undefined: zero pooled variance")
    j = 1.0 - 3.0 / (4.0 * (n_a + n_b) - 9.0)
    return float(j * (a.mean() - b.mean()) / math.sqrt(pooled_var))


@lru_cache(maxsize=8)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _range_cdf_values(w: np.ndarray, k: int) -> np.ndarray:
    """CDF of the range of k iid standard normals at each w (vectorized)."""
    nodes, weights = _leggauss(_INNER_NODES)
    z = nodes * _Z_LIMIT
    phi = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    big_phi = ndtr(z)
    w = np.asarray(w, dtype=float)
    # bracket[i, j] = Phi(z_j) - Phi(z_j - w_i)
    bracket = big_phi[None, :] - ndtr(z[None, :] - w[:, None])
    integrand = k * phi[None, :] * np.clip(bracket, 0.0, None) ** (k - 1)
    vals = _Z_LIMIT * integrand @ weights
    return np.clip(vals, 0.0, 1.0)


def studentized_range_cdf(q: float, k: int, df: float) -> float:
    """P(Q <= q) for the studentized range of k groups with df error dof.

    Double quadrature as documented in the module docstring; df may be
    fractional (Welch-Satterthwaite). df >= 1e8 uses the normal-range
    limit directly.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if df <= 0:
        raise ValueError(f"df must be positive, got {df}")
    if q <= 0.0:
        return 0.0
    if df >= _INFINITE_DF or math.isinf(df):
        return float(_range_cdf_values(np.array([q]), k)[0])
    sigma = 1.0 / math.sqrt(2.0 * df)
    s_lo = max(0.0, 1.0 - 10.0 * sigma)
    s_hi = 1.0 + 12.0 * sigma
    nodes, weights = _leggauss(_OUTER_NODES)
    half = (s_hi - s_lo) / 2.0
    s = s_lo + half * (nodes + 1.0)
    log_norm = math.log(2.0) + (df / 2.0) * math.log(df / 2.0) - math.lgamma(df / 2.0)
    log_density = log_norm + (df - 1.0) * np.log(np.maximum(s, 1e-300)) - df * s * s / 2.0
    density = np.exp(log_density)
    value = half * float((weights * density * _range_cdf_values(q * s, k)).sum())
    return min(1.0, max(0.0, value))


def studentized_range_critical(alpha: float, k: int, df: float) -> float:
    """q such that P(Q <= q) = 1 - alpha, by bisection on the CDF."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    target = 1.0 - alpha
    lo, hi = 1e-9, 100.0
    for _ in range(80):
        mid = (lo + hi) / 2.0
        if studentized_range_cdf(mid, k, df) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def games_howell(
    groups: list[np.ndarray],
    labels: list[str] | None = None,
    alpha: float = 0.05,
) -> list[PairwiseResult]:
    """Games-Howell post-hoc comparisons for all group pairs.

    Per pair: t = |mean_i - mean_j| / sqrt(s_i^2/n_i + s_j^2/n_j) with
    Welch-Satterthwaite df; p = P(Q > t*sqrt(2)) under the studentized
    range with k groups; the confidence interval uses the same critical
    value. Raises for zero-variance groups like welch_anova.
    """
    arrays = _check_groups(groups)
    k = len(arrays)
    if labels is None:
        labels = [str(i) for i in range(k)]
    if len(labels) != k:
        raise ValueError("labels must match the number of groups")
    variances = [g.var(ddof=1) for g in arrays]
    if any(v <= 0.0 for v in variances):
        raise ValueError("Games-Howell undefined: a group has zero variance")
    results = []
    for i, j in combinations(range(k), 2):
        a, b = arrays[i], arrays[j]
        se_sq_a = variances[i] / a.size
        se_sq_b = variances[j] / b.size
        se = math.sqrt(se_sq_a + se_sq_b)
        diff = float(a.mean() - b.mean())
        t = abs(diff) / se
        df = (se_sq_a + se_sq_b) ** 2 / (
            se_sq_a**2 / (a.size - 1) + se_sq_b**2 / (b.size - 1)
        )
        p = 1.0 - studentized_range_cdf(t * math.sqrt(2.0), k, df)
        q_crit = studentized_range_critical(alpha, k, df)
        margin = q_crit * se / math.sqrt(2.0)
        results.append(
            PairwiseResult(
                model_a=labels[i],
                model_b=labels[j],
                mean_diff=diff,
                p_value=p,
                hedges_g=hedges_g(a, b),
                significant=p < alpha,
                df=float(df),
                ci_low=diff - margin,
                ci_high=diff + margin,
            )
        )
    return results


def rank_models(
    pairwise: list[PairwiseResult],
    orientation: str,
    alpha: float = 0.05,
) -> dict[str, RankCell]:
    """Rank models from significant pairwise wins and losses.

    raw_score(model) counts opponents whose mean is significantly below
    it minus those significantly above it; oriented_score flips sign for
    lower-is-better metrics; rank is 1 + number of models with strictly
    better oriented_score, so equal scores share a rank.
    """
    if orientation not in (HIGHER_BETTER, LOWER_BETTER):
        raise ValueError(f"unknown orientation: {orientation!r}")
    models = sorted({r.model_a for r in pairwise} | {r.model_b for r in pairwise})
    expected = {frozenset(p) for p in combinations(models, 2)}
    seen = [frozenset((r.model_a, r.model_b)) for r in pairwise]
    if len(models) < 2 or sorted(map(sorted, seen)) != sorted(map(sorted, expected)):
        raise ValueError("incomplete pairwise set: need every unordered model pair exactly once")
    raw = dict.fromkeys(models, 0)
    for r in pairwise:
        if r.p_value < alpha:
            winner, loser = (r.model_a, r.model_b) if r.mean_diff > 0 else (r.model_b, r.model_a)
            raw[winner] += 1
            raw[loser] -= 1
    sign = 1 if orientation == HIGHER_BETTER else -1
    oriented = {m: sign * s for m, s in raw.items()}
    cells = {}
    for m in models:
        rank = 1 + sum(1 for other in models if oriented[other] > oriented[m])
        cells[m] = RankCell(rank=rank, raw_score=raw[m], oriented_score=oriented[m])
    return cells


def percent_change(before: float, after: float) -> float | None:
    """Signed percentage change; None marks the undefined before == 0 case."""
    if before == 0:
        return None
    return 100.0 * (after - before) / before


def percent_agreement(a: list, b: list) -> float:
    """Percentage of positions where the two label vectors agree."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("need at least one label")
    matches = sum(1 for x, y in zip(a, b) if x == y)
    return 100.0 * matches / len(a)


def majority_vote(a, b, c):
    """Label held by at least two of the three voters."""
    if a == b or a == c:
        return a
    if b == c:
        return b
    raise ValueError("no majority: all three labels differ")
