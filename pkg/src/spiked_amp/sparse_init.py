"""Data-driven initializations for the sparse spike.

Two entry points: diag_max_init picks the single coordinate with the largest
diagonal magnitude (strong-SNR regime), and sample_split_init runs the
N-round random-split procedure (weak-SNR regime): estimate the spike on a
random index block, propagate through the cross block, soft-threshold, and
keep the round whose candidate scores highest on the complement block.

The split rounds read the matrix only through _read_block, which appends a
tag per access to the round's event log.  Tests use that log to check the
independence ordering: the complement block M_{I^c,I^c} is untouched until
the candidate x_j is already built.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._rng import substream
from .denoise import soft_threshold
from .model import SpikedModel

__all__ = [
    "InitializationFailureError",
    "OracleEstimate",
    "SplitRound",
    "default_split_params",
    "diag_max_init",
    "oracle_estimate",
    "sample_split_init",
    "sample_split_rounds",
]


class InitializationFailureError(RuntimeError):
    """Every split round was skipped; no usable starting vector."""


def diag_max_init(M: np.ndarray) -> tuple[int, np.ndarray]:
    """Index of the largest |M_ii| and the corresponding basis vector.

    Ties break toward the smaller index (argmax's first-hit rule).
    """
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError("M must be a nonempty square matrix")
    s_hat = int(np.argmax(np.abs(np.diagonal(M))))
    x1 = np.zeros(M.shape[0])
    x1[s_hat] = 1.0
    return s_hat, x1


class OracleEstimate(NamedTuple):
    vector: np.ndarray
    degenerate: bool


def oracle_estimate(M_sub: np.ndarray, k_hint: int) -> OracleEstimate:
    """Diagonal-thresholding estimate of a sparse spike inside M_sub.

    Keeps the 2*k_hint coordinates with the largest (signed) diagonal
    entries, power-iterates on that principal block, and zero-pads back to
    the submatrix's index range.  A stand-in for the covariance-thresholding
    estimators from the sparse-PCA literature; swap freely as long as the
    output is a unit vector over the same index range.

    The power iteration starts at the basis vector of the block's largest
    |diagonal| entry, so the whole routine is deterministic.  An all-zero
    matrix returns e_1 with the degenerate flag set.
    """
    m = M_sub.shape[0]
    if m < 1:
        raise ValueError("submatrix is empty")
    if k_hint < 1:
        raise ValueError("k_hint must be positive")
    d = np.diagonal(M_sub)
    sel = np.sort(np.argsort(d)[::-1][: min(2 * k_hint, m)])
    B = M_sub[np.ix_(sel, sel)]
    y = np.zeros(sel.size)
    y[int(np.argmax(np.abs(np.diagonal(B))))] = 1.0
    degenerate = True
    for _ in range(200):
        y_new = B @ y
        nrm = float(np.linalg.norm(y_new))
        if nrm == 0.0:
            break
        y_new /= nrm
        moved = min(np.linalg.norm(y_new - y), np.linalg.norm(y_new + y))
        y = y_new
        degenerate = False
        if moved < 1e-13:
            break
    if degenerate:
        out = np.zeros(m)
        out[0] = 1.0
        return OracleEstimate(vector=out, degenerate=True)
    out = np.zeros(m)
    out[sel] = y
    return OracleEstimate(vector=out, degenerate=False)


@dataclass(frozen=True)
class SplitRound:
    index_set: tuple[int, ...]
    complement: tuple[int, ...]
    v_sub: np.ndarray | None
    v_j: np.ndarray | None
    x_j: np.ndarray | None
    score: float
    skipped: bool
    degenerate_oracle: bool
    events: tuple[str, ...]


def _read_block(M: np.ndarray, rows: np.ndarray, cols: np.ndarray, log: list[str], tag: str) -> np.ndarray:
    log.append(tag)
    return M[np.ix_(rows, cols)]


def default_split_params(n: int, k: int) -> tuple[float, int, float]:
    """(p, N, tau1) at the reference operating point for sparsity k."""
    p = min(4.0 * np.log(n) / k, 0.9)
    N = int(np.ceil(np.log(n)))
    tau1 = 2.0 * np.sqrt(np.log(n) / n)
    return p, N, tau1


def sample_split_rounds(
    model: SpikedModel,
    p: float,
    N: int,
    tau1: float,
    seed: int,
    k_hint: int | None = None,
) -> list[SplitRound]:
    """Run all N split rounds and return them, skipped ones included.

    A round is skipped when its partition leaves either block empty or when
    the soft-threshold wipes the propagated vector to zero; skipped rounds
    carry score -inf so the argmax never picks them.
    """
    n = model.n
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    if p * n < 2:
        raise ValueError("p * n must be at least 2")
    if N < 1:
        raise ValueError("N must be positive")
    if tau1 <= 0:
        raise ValueError("tau1 must be positive")
    if k_hint is None:
        k = model.sparsity if model.sparsity is not None else n
        k_hint = max(1, round(k * p))
    M = model.observed
    rounds: list[SplitRound] = []
    for j in range(N):
        rng = substream(seed, "split-round", j)
        mask = rng.random(n) < p
        I = np.flatnonzero(mask)
        Ic = np.flatnonzero(~mask)
        log: list[str] = []
        if I.size == 0 or Ic.size == 0:
            rounds.append(
                SplitRound(
                    index_set=tuple(int(i) for i in I),
                    complement=tuple(int(i) for i in Ic),
                    v_sub=None, v_j=None, x_j=None,
                    score=float("-inf"), skipped=True,
                    degenerate_oracle=False, events=tuple(log),
                )
            )
            continue
        M_II = _read_block(M, I, I, log, "read:II")
        est = oracle_estimate(M_II, k_hint)
        log.append("oracle")
        v_j = _read_block(M, Ic, I, log, "read:IcI") @ est.vector
        x_raw = soft_threshold(v_j, tau1)
        nrm = float(np.linalg.norm(x_raw))
        if nrm == 0.0:
            rounds.append(
                SplitRound(
                    index_set=tuple(int(i) for i in I),
                    complement=tuple(int(i) for i in Ic),
                    v_sub=est.vector, v_j=v_j, x_j=None,
                    score=float("-inf"), skipped=True,
                    degenerate_oracle=est.degenerate, events=tuple(log),
                )
            )
            continue
        x_j = x_raw / nrm
        log.append("xj_built")
        score = float(x_j @ _read_block(M, Ic, Ic, log, "read:score_IcIc") @ x_j)
        rounds.append(
            SplitRound(
                index_set=tuple(int(i) for i in I),
                complement=tuple(int(i) for i in Ic),
                v_sub=est.vector, v_j=v_j, x_j=x_j,
                score=score, skipped=False,
                degenerate_oracle=est.degenerate, events=tuple(log),
            )
        )
    return rounds


def sample_split_init(
    model: SpikedModel,
    p: float,
    N: int,
    tau1: float,
    seed: int,
    k_hint: int | None = None,
) -> tuple[SplitRound, np.ndarray]:
    """Winner of the split procedure and its unit candidate over I^c.

    The caller is expected to run AMP on the complement block
    M[complement, complement], not on the full matrix.
    """
    rounds = sample_split_rounds(model, p, N, tau1, seed, k_hint=k_hint)
    live = [r for r in rounds if not r.skipped]
    if not live:
        raise InitializationFailureError(f"all {N} split rounds were skipped")
    best = max(live, key=lambda r: r.score)
    return best, best.x_j
