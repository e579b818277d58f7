"""Error removal using correlation (ERC).

A regressor output is replaced by the candidate ``t + delta_i`` whose
Spearman rank correlation with the output is largest, so every corrected
point is an exact class-shifted copy of its input.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DomainError, ShapeError

UNDEFINED = float("nan")


@dataclass(frozen=True)
class ErcDecision:
    chosen_class: int
    correlations: np.ndarray
    corrected_position: np.ndarray
    fallback: bool = False


def _pearson_rows(ranks_u: np.ndarray, ranks_v: np.ndarray) -> np.ndarray:
    cu = ranks_u - ranks_u.mean(axis=-1, keepdims=True)
    cv = ranks_v - ranks_v.mean(axis=-1, keepdims=True)
    su = np.einsum("...i,...i->...", cu, cu)
    sv = np.einsum("...i,...i->...", cv, cv)
    num = np.einsum("...i,...i->...", cu, cv)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = num / np.sqrt(su * sv)
    rho = np.where((su > 0) & (sv > 0), np.clip(rho, -1.0, 1.0), np.nan)
    return rho


def spearman(u, v) -> float:
    """Spearman rank correlation with average ranks for ties.

    Returns NaN when either vector is constant.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise ShapeError(f"need two vectors of equal length, got {u.shape} and {v.shape}")
    if u.shape[0] < 2:
        raise DomainError("rank correlation needs at least two entries")
    return float(_pearson_rows(rankdata(u), rankdata(v)))


def candidate_correlations(t_input, t_transformed, deltas) -> np.ndarray:
    """Spearman correlation of ``t_transformed`` with each ``t_input + delta_i``.

    Works on a single sample (``(d,)`` vectors) or a batch (``(N, d)``),
    returning ``(n,)`` or ``(N, n)``.
    """
    t_input = np.asarray(t_input, dtype=np.float64)
    t_transformed = np.asarray(t_transformed, dtype=np.float64)
    deltas = np.asarray(deltas, dtype=np.float64)
    if t_input.shape != t_transformed.shape or t_input.shape[-1] != deltas.shape[1]:
        raise ShapeError(
            f"input {t_input.shape}, transformed {t_transformed.shape} and "
            f"shifts {deltas.shape} disagree"
        )
    candidates = t_input[..., None, :] + deltas
    cand_ranks = rankdata(candidates, axis=-1)
    out_ranks = rankdata(t_transformed, axis=-1)[..., None, :]
    return _pearson_rows(cand_ranks, out_ranks)


def _argmax_defined(correlations: np.ndarray) -> np.ndarray:
    # NaN (undefined) ranks below every real correlation; ties -> lowest id
    return np.argmax(np.where(np.isnan(correlations), -np.inf, correlations), axis=-1)


def erc_correct(t_input, t_transformed, model) -> ErcDecision:
    """Snap one transformed sample to its best class-shift candidate."""
    t_input = np.asarray(t_input, dtype=np.float64)
    t_transformed = np.asarray(t_transformed, dtype=np.float64)
    if t_input.shape != (model.dim,):
        raise ShapeError(f"expected a ({model.dim},) vector, got {t_input.shape}")
    if model.n_classes == 1:
        corr = np.array([spearman(t_transformed, t_input + model.deltas[0])])
        return ErcDecision(0, corr, t_input + model.deltas[0])
    corr = candidate_correlations(t_input, t_transformed, model.deltas)
    if np.all(np.isnan(corr)):
        return ErcDecision(-1, corr, t_transformed.copy(), fallback=True)
    best = int(_argmax_defined(corr))
    return ErcDecision(best, corr, t_input + model.deltas[best])


def erc_correct_batch(inputs, transformed, model) -> tuple:
    """Vectorised :func:`erc_correct` over rows.

    Returns ``(chosen, correlations, corrected, fallback)`` where ``chosen``
    is -1 on rows whose correlations were all undefined; those rows keep
    their uncorrected position.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    transformed = np.atleast_2d(np.asarray(transformed, dtype=np.float64))
    if inputs.shape[0] == 0:
        return (np.zeros(0, dtype=np.int64), np.zeros((0, model.n_classes)),
                np.zeros((0, model.dim)), np.zeros(0, dtype=bool))
    corr = candidate_correlations(inputs, transformed, model.deltas)
    fallback = np.all(np.isnan(corr), axis=1)
    chosen = _argmax_defined(corr).astype(np.int64)
    if model.n_classes == 1:
        fallback[:] = False
        chosen[:] = 0
    corrected = inputs + model.deltas[chosen]
    corrected[fallback] = transformed[fallback]
    chosen[fallback] = -1
    return chosen, corr, corrected, fallback
