"""Rank correlations with seeded permutation p-values."""

from collections.abc import Callable, Sequence
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import rankdata

from src.utils.exceptions import LengthMismatch, TooFewSamples, ZeroVariance

DEFAULT_PERMUTATIONS = 10_000
MIN_SAMPLES = 3
PERMUTATION_CHUNK = 2_000
MAX_CHUNK_CELLS = 4_000_000
# Permuted statistics within this distance of the observed one count as "as extreme"
_TIE_TOLERANCE = 1e-12


class CorrelationMethod(str, Enum):
    SPEARMAN = "spearman"
    KENDALL_TAU_B = "kendall-tau-b"


class CorrelationResult(BaseModel):
    """Coefficient and two-sided permutation p-value."""

    model_config = ConfigDict(frozen=True)

    coefficient: float = Field(ge=-1.0, le=1.0)
    p_value: float = Field(ge=0.0, le=1.0)
    n: int = Field(ge=MIN_SAMPLES)
    method: CorrelationMethod
    permutations: int = Field(ge=1)


def _validated(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x, dtype=np.float64).ravel()
    b = np.asarray(y, dtype=np.float64).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"x has {a.size} values, y has {b.size}")
    if a.size < MIN_SAMPLES:
        raise TooFewSamples(f"rank correlation needs at least {MIN_SAMPLES} pairs, got {a.size}")
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise ZeroVariance("all values of one variable are equal")
    return a, b


def _spearman_batch(rx: np.ndarray, ry_rows: np.ndarray) -> np.ndarray:
    """Pearson correlation of rank vector rx against each row of ry_rows."""
    cx = rx - rx.mean()
    cy = ry_rows - ry_rows.mean(axis=1, keepdims=True)
    num = cy @ cx
    den = np.sqrt((cx @ cx) * (cy**2).sum(axis=1))
    return np.asarray(np.clip(num / den, -1.0, 1.0))


def _signs(v: np.ndarray) -> np.ndarray:
    return np.sign(v[:, np.newaxis] - v[np.newaxis, :])


def _kendall_batch(sx: np.ndarray, sy: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """tau-b of x against y permuted by each row of perms; sx, sy are pairwise sign matrices."""
    n = sx.shape[0]
    pairs = n * (n - 1) / 2.0
    ties_x = (np.count_nonzero(sx == 0) - n) / 2.0
    ties_y = (np.count_nonzero(sy == 0) - n) / 2.0
    permuted = sy[perms[:, :, np.newaxis], perms[:, np.newaxis, :]]
    concordance = np.einsum("ij,pij->p", sx, permuted) / 2.0
    tau = concordance / np.sqrt((pairs - ties_x) * (pairs - ties_y))
    return np.asarray(np.clip(tau, -1.0, 1.0))


def _permutation_p(
    observed: float,
    statistic: Callable[[np.ndarray], np.ndarray],
    n: int,
    permutations: int,
    seed: int,
) -> float:
    rng = np.random.default_rng(seed)
    extreme = 0
    remaining = permutations
    while remaining > 0:
        size = min(PERMUTATION_CHUNK, remaining, max(1, MAX_CHUNK_CELLS // (n * n)))
        perms = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
        stats = statistic(perms)
        extreme += int(np.count_nonzero(np.abs(stats) >= abs(observed) - _TIE_TOLERANCE))
        remaining -= size
    return (extreme + 1) / (permutations + 1)


def spearman(
    x: Sequence[float],
    y: Sequence[float],
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
) -> CorrelationResult:
    """Spearman's rank correlation (average ranks for ties).

    Raises:
        LengthMismatch: x and y differ in length
        TooFewSamples: Fewer than three pairs
        ZeroVariance: One variable is constant
    """
    a, b = _validated(x, y)
    rx, ry = rankdata(a), rankdata(b)
    observed = float(_spearman_batch(rx, ry[np.newaxis, :])[0])
    p = _permutation_p(
        observed, lambda perms: _spearman_batch(rx, ry[perms]), a.size, permutations, seed
    )
    return CorrelationResult(
        coefficient=observed,
        p_value=p,
        n=a.size,
        method=CorrelationMethod.SPEARMAN,
        permutations=permutations,
    )


def kendall(
    x: Sequence[float],
    y: Sequence[float],
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
) -> CorrelationResult:
    """Kendall's tau-b: (concordant - discordant) / sqrt((n0 - t_x)(n0 - t_y)).

    Raises:
        LengthMismatch: x and y differ in length
        TooFewSamples: Fewer than three pairs
        ZeroVariance: One variable is constant
    """
    a, b = _validated(x, y)
    sx, sy = _signs(a), _signs(b)
    identity = np.arange(a.size)[np.newaxis, :]
    observed = float(_kendall_batch(sx, sy, identity)[0])
    p = _permutation_p(
        observed, lambda perms: _kendall_batch(sx, sy, perms), a.size, permutations, seed
    )
    return CorrelationResult(
        coefficient=observed,
        p_value=p,
        n=a.size,
        method=CorrelationMethod.KENDALL_TAU_B,
        permutations=permutations,
    )


def correlate(
    method: CorrelationMethod,
    x: Sequence[float],
    y: Sequence[float],
    permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
) -> CorrelationResult:
    if method is CorrelationMethod.SPEARMAN:
        return spearman(x, y, permutations, seed)
    return kendall(x, y, permutations, seed)
