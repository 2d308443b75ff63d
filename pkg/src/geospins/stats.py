"""Small statistical helpers shared by the experiment drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

__all__ = [
    "batch_means_se",
    "MannKendallResult",
    "mann_kendall",
    "NnlsFit",
    "nnls_fit",
    "hill_exponent",
    "ess_ratio",
]


def batch_means_se(x: np.ndarray) -> tuple[float, float]:
    """(mean, standard error) of a correlated series via batch means.

    The series is cut into ~sqrt(n) equal batches; the spread of the batch
    means absorbs the autocorrelation that a naive i.i.d. standard error
    would miss.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    n = len(x)
    if n == 0:
        raise ValueError("empty series")
    mean = float(x.mean())
    if n < 4:
        return mean, float("nan")
    n_batches = max(2, int(math.isqrt(n)))
    size = n // n_batches
    trimmed = x[: n_batches * size].reshape(n_batches, size)
    bm = trimmed.mean(axis=1)
    return mean, float(bm.std(ddof=1) / math.sqrt(n_batches))


@dataclass(frozen=True)
class MannKendallResult:
    s: int
    var_s: float
    z: float
    p_increasing: float  # one-sided p-value against "no increasing trend"


def mann_kendall(x: np.ndarray) -> MannKendallResult:
    """One-sided Mann-Kendall trend test (alternative: increasing)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 observations")
    s = 0
    for i in range(n - 1):
        s += int(np.sign(x[i + 1 :] - x[i]).sum())
    _, counts = np.unique(x, return_counts=True)
    ties = counts[counts > 1]
    var_s = (n * (n - 1) * (2 * n + 5) - np.sum(ties * (ties - 1) * (2 * ties + 5))) / 18.0
    if var_s <= 0:
        return MannKendallResult(s=s, var_s=0.0, z=0.0, p_increasing=1.0)
    if s > 0:
        z = (s - 1) / math.sqrt(var_s)
    elif s < 0:
        z = (s + 1) / math.sqrt(var_s)
    else:
        z = 0.0
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    return MannKendallResult(s=s, var_s=float(var_s), z=float(z), p_increasing=float(p))


@dataclass(frozen=True, eq=False)
class NnlsFit:
    coefficients: np.ndarray
    predictions: np.ndarray
    residual_norm: float
    r_squared: float


def nnls_fit(design: np.ndarray, response: np.ndarray) -> NnlsFit:
    """Nonnegative least squares with a centered-R^2 quality score."""
    design = np.asarray(design, dtype=np.float64)
    response = np.asarray(response, dtype=np.float64).reshape(-1)
    coef, rnorm = nnls(design, response)
    pred = design @ coef
    ss_res = float(((response - pred) ** 2).sum())
    ss_tot = float(((response - response.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return NnlsFit(
        coefficients=coef, predictions=pred, residual_norm=float(rnorm), r_squared=r2
    )


def hill_exponent(x: np.ndarray, tail_fraction: float = 0.1, min_tail: int = 10) -> float:
    """Hill estimate of the tail index of a positive sample.

    Values above 1 indicate a finite mean; light-tailed input yields large
    estimates.  Returns inf when the tail is degenerate.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    x = x[x > 0]
    n = len(x)
    if n < min_tail + 1:
        raise ValueError("sample too small for a tail estimate")
    k = min(max(min_tail, int(tail_fraction * n)), n - 1)
    top = np.sort(x)[::-1][: k + 1]
    logs = np.log(top[:k] / top[k])
    gamma = float(logs.mean())
    if gamma <= 0:
        return float("inf")
    return 1.0 / gamma


def ess_ratio(x: np.ndarray) -> float:
    """Effective sample size of a positive-weight mean, (sum x)^2 / sum x^2."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    denom = float((x * x).sum())
    if denom == 0:
        return 0.0
    return float(x.sum()) ** 2 / denom
