#!/usr/bin/env python3
"""Generate frozen oracle fixtures for the statistics test suite.

Oracles used (all independent of the package under test):
  * Levene: scipy.stats.levene(center="mean")
  * Welch ANOVA: statsmodels.stats.oneway.anova_oneway(use_var="unequal")
  * Games-Howell p-values: pairwise t / Welch-Satterthwaite df computed
    here with numpy and the p taken from scipy.stats.studentized_range
  * Hedges' g: direct numpy transcription of the published formula
  * Studentized-range critical values: published 5% tables, cross-checked
    against scipy.stats.studentized_range.ppf before freezing

Output: tests/fixtures/stats_oracle.json (checked in; tests never call
the oracles at runtime).
"""

from __future__ import annotations

import json
import math
import os
import sys

import numpy as np
from scipy import stats as sps
from statsmodels.stats.oneway import anova_oneway

N_DATASETS = 20
K_GROUPS = 4

# Published upper-5% studentized range quantiles q(alpha=0.05; k, df).
Q_TABLE = [
    {"alpha": 0.05, "k": 3, "df": 10, "q": 3.877},
    {"alpha": 0.05, "k": 4, "df": 10, "q": 4.327},
    {"alpha": 0.05, "k": 5, "df": 10, "q": 4.654},
    {"alpha": 0.05, "k": 6, "df": 10, "q": 4.912},
    {"alpha": 0.05, "k": 3, "df": 20, "q": 3.578},
    {"alpha": 0.05, "k": 4, "df": 20, "q": 3.958},
    {"alpha": 0.05, "k": 5, "df": 20, "q": 4.232},
    {"alpha": 0.05, "k": 6, "df": 20, "q": 4.445},
    {"alpha": 0.05, "k": 3, "df": None, "q": 3.314},
    {"alpha": 0.05, "k": 4, "df": None, "q": 3.633},
    {"alpha": 0.05, "k": 5, "df": None, "q": 3.858},
    {"alpha": 0.05, "k": 6, "df": None, "q": 4.030},
]


def oracle_hedges_g(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = len(a), len(b)
    pooled = math.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    correction = 1.0 - 3.0 / (4.0 * (na + nb) - 9.0)
    return correction * (a.mean() - b.mean()) / pooled


def oracle_games_howell(groups: list[np.ndarray]) -> list[dict]:
    k = len(groups)
    rows = []
    for i in range(k):
        for j in range(i + 1, k):
            a, b = groups[i], groups[j]
            va, vb = a.var(ddof=1) / len(a), b.var(ddof=1) / len(b)
            t = abs(a.mean() - b.mean()) / math.sqrt(va + vb)
            df = (va + vb) ** 2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
            p = float(sps.studentized_range.sf(t * math.sqrt(2.0), k, df))
            rows.append(
                {
                    "i": i,
                    "j": j,
                    "p_value": p,
                    "df": df,
                    "hedges_g": oracle_hedges_g(a, b),
                    "mean_diff": float(a.mean() - b.mean()),
                }
            )
    return rows


def make_dataset(rng: np.random.Generator) -> dict:
    groups = []
    for _ in range(K_GROUPS):
        n = int(rng.integers(10, 61))
        mean = float(rng.uniform(-2.0, 2.0))
        sd = float(rng.uniform(0.5, 3.0))
        groups.append(np.round(rng.normal(mean, sd, size=n), 6))
    levene_stat, levene_p = sps.levene(*groups, center="mean")
    scaled = [groups[0] * 10.0] + [g.copy() for g in groups[1:]]
    _, levene_scaled_p = sps.levene(*scaled, center="mean")
    welch = anova_oneway(groups, use_var="unequal", welch_correction=True)
    shifted = [g.copy() for g in groups]
    shifted[0] = shifted[0] + 10.0 * shifted[0].std(ddof=1)
    welch_shifted = anova_oneway(shifted, use_var="unequal", welch_correction=True)
    return {
        "groups": [g.tolist() for g in groups],
        "levene": {"statistic": float(levene_stat), "p_value": float(levene_p)},
        "levene_scaled_p": float(levene_scaled_p),
        "welch": {
            "F": float(welch.statistic),
            "df1": float(welch.df_num),
            "df2": float(welch.df_denom),
            "p_value": float(welch.pvalue),
        },
        "welch_shifted_p": float(welch_shifted.pvalue),
        "games_howell": oracle_games_howell(groups),
    }


def check_q_table() -> list[dict]:
    rows = []
    for row in Q_TABLE:
        df = math.inf if row["df"] is None else row["df"]
        scipy_q = float(sps.studentized_range.ppf(1 - row["alpha"], row["k"], df))
        if abs(scipy_q - row["q"]) > 2e-3:
            raise SystemExit(
                f"table/scipy disagreement at k={row['k']} df={row['df']}: "
                f"table {row['q']} vs scipy {scipy_q:.5f}"
            )
        rows.append({**row, "scipy_q": scipy_q})
    return rows


def main() -> int:
    rng = np.random.Generator(np.random.Philox(key=20240917))
    fixture = {
        "seed_note": "Philox key 20240917; regenerate with tools/make_stats_fixtures.py",
        "datasets": [make_dataset(rng) for _ in range(N_DATASETS)],
        "q_table": check_q_table(),
    }
    out = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "stats_oracle.json")
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(fixture, fh, indent=1)
        fh.write("\n")
    print(f"wrote {os.path.normpath(out)}: {N_DATASETS} datasets, {len(fixture['q_table'])} q rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
