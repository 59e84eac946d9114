"""Conditional-independence tests: Fisher-z partial correlation and G^2."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import chdtrc, ndtr

from .io import DataMatrix
from .modelgen import config_index


class CITestError(ValueError):
    pass


@dataclass(frozen=True)
class CITestResult:
    statistic: float
    p_value: float
    independent: bool
    df: int
    degenerate: bool = False


def _result(stat, pval, alpha, df, degenerate=False):
    pval = min(1.0, max(0.0, float(pval)))
    return CITestResult(float(stat), pval, pval > alpha, int(df), degenerate)


def partial_correlation(corr: np.ndarray, i: int, j: int, cond: Sequence[int]) -> float:
    """Partial correlation of (i, j) given ``cond`` from a correlation matrix.

    Raises ``np.linalg.LinAlgError`` when the submatrix is singular.
    """
    if not cond:
        return float(corr[i, j])
    idx = [i, j, *cond]
    sub = corr[np.ix_(idx, idx)]
    if np.linalg.cond(sub) > 1e12:
        raise np.linalg.LinAlgError("singular correlation submatrix")
    prec = np.linalg.inv(sub)
    return float(-prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1]))


class FisherZ:
    """Fisher-z test with the correlation matrix computed once per dataset."""

    def __init__(self, data: DataMatrix):
        if data.categorical:
            raise CITestError("Fisher-z needs continuous data")
        self.n = data.n
        with np.errstate(invalid="ignore", divide="ignore"):
            self.corr = np.atleast_2d(np.corrcoef(data.values, rowvar=False))

    def __call__(self, i: int, j: int, cond: Sequence[int], alpha: float) -> CITestResult:
        cond = list(cond)
        df = len(cond)
        if self.n <= len(cond) + 3:
            raise CITestError(f"need n > |S| + 3, got n={self.n}, |S|={len(cond)}")
        try:
            r = partial_correlation(self.corr, i, j, cond)
        except np.linalg.LinAlgError:
            return _result(math.inf, 0.0, alpha, df, degenerate=True)
        if not math.isfinite(r):
            return _result(math.inf, 0.0, alpha, df, degenerate=True)
        if abs(r) >= 1.0:
            return _result(math.inf, 0.0, alpha, df)
        stat = math.sqrt(self.n - len(cond) - 3) * math.atanh(r)
        pval = 2.0 * ndtr(-abs(stat))
        return _result(stat, pval, alpha, df)


def fisher_z_test(data: DataMatrix, i: int, j: int, cond: Sequence[int], alpha: float) -> CITestResult:
    return FisherZ(data)(i, j, cond, alpha)


class G2:
    """G^2 likelihood-ratio test on categorical data."""

    def __init__(self, data: DataMatrix):
        if not data.categorical:
            raise CITestError("G^2 needs categorical data")
        self.values = data.values
        self.card = data.cardinalities

    def __call__(self, i: int, j: int, cond: Sequence[int], alpha: float) -> CITestResult:
        cond = list(cond)
        ri, rj = self.card[i], self.card[j]
        cs = [self.card[k] for k in cond]
        qs = int(np.prod(cs)) if cond else 1
        df = (ri - 1) * (rj - 1) * qs
        if df <= 0:
            raise CITestError("G^2 test has no degrees of freedom")
        z = config_index(self.values[:, cond], cs)
        cell = (z * ri + self.values[:, i]) * rj + self.values[:, j]
        obs = np.bincount(cell, minlength=qs * ri * rj).reshape(qs, ri, rj).astype(float)
        n_z = obs.sum(axis=(1, 2), keepdims=True)
        n_iz = obs.sum(axis=2, keepdims=True)
        n_jz = obs.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            expected = n_iz * n_jz / n_z
            terms = np.where(obs > 0, obs * np.log(obs / expected), 0.0)
        stat = max(0.0, 2.0 * float(terms.sum()))
        return _result(stat, chdtrc(df, stat), alpha, df)


def g2_test(data: DataMatrix, i: int, j: int, cond: Sequence[int], alpha: float) -> CITestResult:
    return G2(data)(i, j, cond, alpha)
