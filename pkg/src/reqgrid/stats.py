"""Rank-based significance tests: Friedman across factor levels, Wilcoxon signed-rank
for paired group-level scores.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from .errors import DesignError, PartitionError
from .metrics import evaluate

EXACT_MAX_N = 25


class Method(enum.Enum):
    FRIEDMAN = "Friedman"
    WILCOXON_EXACT = "WilcoxonExact"
    WILCOXON_NORMAL = "WilcoxonNormal"


@dataclass(frozen=True)
class StatTestResult:
    method: Method
    statistic: float
    df: int | None
    p_value: float
    n_effective: int
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


@dataclass(frozen=True)
class RankMatrix:
    values: np.ndarray
    ranks: np.ndarray


def average_ranks(values: Sequence[float]) -> list[float]:
    """Ascending ranks starting at 1; tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for t in range(i, j + 1):
            ranks[order[t]] = mean_rank
        i = j + 1
    return ranks


def _tie_sizes(values: Sequence[float]) -> list[int]:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return [t for t in counts.values() if t > 1]


def _as_complete_matrix(values) -> np.ndarray:
    rows = [list(r) for r in values]
    if not rows:
        raise DesignError("empty design matrix")
    k = len(rows[0])
    missing = []
    for i, r in enumerate(rows):
        if len(r) != k:
            raise DesignError(f"row {i} has {len(r)} cells, expected {k}")
        for j, v in enumerate(r):
            if v is None or not math.isfinite(float(v)):
                missing.append((i, j))
    if missing:
        shown = ", ".join(f"({i},{j})" for i, j in missing[:20])
        more = f" and {len(missing) - 20} more" if len(missing) > 20 else ""
        raise DesignError(f"incomplete design: missing or non-finite cells {shown}{more}")
    return np.asarray(rows, dtype=float)


def rank_rows(values) -> RankMatrix:
    mat = _as_complete_matrix(values)
    n, k = mat.shape
    if n < 2 or k < 2:
        raise DesignError(f"need at least 2 blocks and 2 treatments, got {n}x{k}")
    ranks = np.array([average_ranks(list(row)) for row in mat])
    return RankMatrix(mat, ranks)


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail of the chi-square distribution, Q(df/2, x/2)."""
    if x < 0:
        raise ValueError("chi-square statistic must be non-negative")
    if df < 1:
        raise ValueError("degrees of freedom must be positive")
    return float(gammaincc(df / 2.0, x / 2.0))


def friedman_test(values) -> StatTestResult:
    """Friedman rank test; rows are blocks, columns are the levels under test.

    Uses the usual tie-corrected statistic and a chi-square tail with k-1
    degrees of freedom.
    """
    rm = rank_rows(values)
    n, k = rm.ranks.shape
    col_sums = rm.ranks.sum(axis=0)
    q_raw = 12.0 / (n * k * (k + 1)) * math.fsum(r * r for r in col_sums) - 3.0 * n * (k + 1)
    tie_term = sum(t ** 3 - t for row in rm.values for t in _tie_sizes(list(row)))
    correction = 1.0 - tie_term / (n * (k ** 3 - k))
    if correction <= 0:
        return StatTestResult(Method.FRIEDMAN, 0.0, k - 1, 1.0, n,
                              ("all blocks fully tied; no ranking signal",))
    q = max(0.0, q_raw / correction)
    return StatTestResult(Method.FRIEDMAN, q, k - 1, chi_square_sf(q, k - 1), n)


def partition_groups(n: int) -> list[int]:
    """Split ``n`` items into consecutive groups of 4 and 3, as many 4s as possible."""
    if n < 3 or n == 5:
        raise PartitionError(f"{n} items cannot be split into groups of 3 and 4")
    threes = {0: 0, 1: 3, 2: 2, 3: 1}[n % 4]
    fours = (n - 3 * threes) // 4
    return [4] * fours + [3] * threes


def group_wf1(preds: Sequence, golds: Sequence[str], groups: Sequence[int],
              roster: Sequence[str]) -> list[float]:
    """Weighted F1 of each contiguous group, weighted by within-group supports."""
    if sum(groups) != len(preds) or len(preds) != len(golds):
        raise DesignError(
            f"groups cover {sum(groups)} items but there are {len(preds)} predictions "
            f"and {len(golds)} golds"
        )
    out = []
    start = 0
    for size in groups:
        end = start + size
        out.append(evaluate(preds[start:end], golds[start:end], roster).weighted.f1)
        start = end
    return out


def signed_rank_null_counts(doubled_ranks: Sequence[int]) -> list[int]:
    """Number of sign assignments giving each value of 2*W+ (index = value)."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    reach = 0
    for r in doubled_ranks:
        for s in range(reach, -1, -1):
            if counts[s]:
                counts[s + r] += counts[s]
        reach += r
    return counts


def wilcoxon_signed_rank(x: Sequence[float], y: Sequence[float], method: str = "auto",
                         exact_max_n: int = EXACT_MAX_N) -> StatTestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. Up to ``exact_max_n`` remaining pairs the p-value
    is the exact share of the 2^n sign assignments whose min(W+, W-) is at most
    the observed one; above that a tie- and continuity-corrected normal
    approximation is used. ``method`` may force "exact" or "normal".
    """
    if len(x) != len(y):
        raise DesignError(f"paired samples differ in length: {len(x)} vs {len(y)}")
    if len(x) < 1:
        raise DesignError("need at least one pair")
    diffs = [float(a) - float(b) for a, b in zip(x, y)]
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    dropped = len(diffs) - n
    notes = [f"dropped {dropped} zero differences"] if dropped else []
    if n == 0:
        return StatTestResult(Method.WILCOXON_EXACT, 0.0, None, 1.0, 0,
                              tuple(notes + ["all differences zero"]))
    ranks = average_ranks([abs(d) for d in nonzero])
    doubled = [int(round(2 * r)) for r in ranks]
    w_plus2 = sum(r for r, d in zip(doubled, nonzero) if d > 0)
    total2 = sum(doubled)
    w2 = min(w_plus2, total2 - w_plus2)
    use_exact = method == "exact" or (method == "auto" and n <= exact_max_n)
    if use_exact:
        counts = signed_rank_null_counts(doubled)
        hits = sum(c for t, c in enumerate(counts) if min(t, total2 - t) <= w2)
        return StatTestResult(Method.WILCOXON_EXACT, w2 / 2, None, hits / 2 ** n, n, tuple(notes))
    mean = n * (n + 1) / 4
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(t ** 3 - t for t in _tie_sizes([abs(d) for d in nonzero])) / 48
    if var <= 0:
        return StatTestResult(Method.WILCOXON_NORMAL, w2 / 2, None, 1.0, n,
                              tuple(notes + ["zero variance"]))
    z = max(0.0, abs(w2 / 2 - mean) - 0.5) / math.sqrt(var)
    p = min(1.0, math.erfc(z / math.sqrt(2)))
    return StatTestResult(Method.WILCOXON_NORMAL, w2 / 2, None, p, n, tuple(notes))
