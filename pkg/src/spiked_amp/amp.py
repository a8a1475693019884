"""The AMP engine: single step, full runs, spectral initialization.

A run owns nothing random; the model, the starting point, and the step-0
convention eta_0(x_0) are all passed in, so the same trajectory is
reproducible from its inputs alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import denoise
from ._rng import substream
from .denoise import DegenerateIterateError, DenoiserState
from .model import SpikedModel

__all__ = [
    "AmpTrajectory",
    "SpectralInit",
    "amp_step",
    "default_power_steps",
    "run_amp",
    "sign_align",
    "spectral_init",
]


@dataclass(frozen=True)
class AmpTrajectory:
    """Iterates x_1..x_T with the per-iteration denoiser bookkeeping.

    denoised[t-1] = eta_t(x_t) and onsager[t-1] = <eta_t'(x_t)>, both fitted
    on iterates[t-1].  When a fit degenerates the run stops early and
    `failure` carries (t, message); all lists then end at the last good t.
    """

    iterates: list[np.ndarray]
    denoised: list[np.ndarray]
    states: list[DenoiserState]
    onsager: list[float]
    eta0_of_x0: np.ndarray
    failure: tuple[int, str] | None = None


def amp_step(
    M: np.ndarray, eta_xt: np.ndarray, eta_prev: np.ndarray, onsager: float
) -> np.ndarray:
    """x_{t+1} = M eta_t(x_t) - <eta_t'(x_t)> eta_{t-1}(x_{t-1})."""
    n = M.shape[0]
    if M.shape != (n, n) or eta_xt.shape != (n,) or eta_prev.shape != (n,):
        raise ValueError(
            f"dimension mismatch: M {M.shape}, eta {eta_xt.shape}, prev {eta_prev.shape}"
        )
    return M @ eta_xt - onsager * eta_prev


def _fit(family: str, x: np.ndarray, n: int, tau: float) -> DenoiserState:
    if family == "identity":
        return denoise.fit_identity()
    if family == "tanh-z2":
        return denoise.fit_tanh(x, n)
    if family == "soft-threshold":
        return denoise.fit_soft_threshold(x, tau)
    raise ValueError(f"unknown denoiser family {family!r}")


def run_amp(
    model: SpikedModel,
    family: str,
    x1: np.ndarray,
    eta0_of_x0: np.ndarray,
    T: int,
    tau: float = 0.0,
) -> AmpTrajectory:
    """Run T iterations from x1.

    eta0_of_x0 is the step-0 convention: x1/lam for the spectrally
    initialized tanh pipeline, zero for the sparse pipeline.  `tau` is only
    read by the soft-threshold family (constant across iterations).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    M = model.observed
    n = model.n
    iterates = [np.asarray(x1, dtype=np.float64)]
    denoised: list[np.ndarray] = []
    states: list[DenoiserState] = []
    onsager: list[float] = []
    failure = None
    eta_prev = np.asarray(eta0_of_x0, dtype=np.float64)
    for t in range(1, T + 1):
        x = iterates[-1]
        try:
            state = _fit(family, x, n, tau)
        except DegenerateIterateError as exc:
            failure = (t, str(exc))
            break
        eta = denoise.apply(state, x)
        ons = denoise.derivative_avg(state, x)
        denoised.append(eta)
        states.append(state)
        onsager.append(ons)
        if t < T:
            iterates.append(amp_step(M, eta, eta_prev, ons))
            eta_prev = eta
    return AmpTrajectory(
        iterates=iterates,
        denoised=denoised,
        states=states,
        onsager=onsager,
        eta0_of_x0=np.asarray(eta0_of_x0, dtype=np.float64),
        failure=failure,
    )


@dataclass(frozen=True)
class SpectralInit:
    """Output of the power-iteration initializer.

    x1 is the unit-norm estimate a_s M^s v_tilde (any SNR rescaling is the
    caller's job).  lambda_tilde back-solves the top-eigenvalue location and
    is NaN whenever lambda_max < 2 (no real solution); check `valid`.
    """

    x1: np.ndarray
    s: int
    a_s: float
    v_tilde: np.ndarray
    lambda_max: float
    lambda_tilde: float
    vhat: np.ndarray

    @property
    def valid(self) -> bool:
        return np.isfinite(self.lambda_tilde)


def default_power_steps(n: int, lam: float) -> int:
    """s = ceil(8 log n / (lam-1)^2), capped at n/4."""
    s = int(np.ceil(8.0 * np.log(n) / (lam - 1.0) ** 2))
    return max(1, min(s, n // 4))


def spectral_init(M: np.ndarray, s: int, seed: int) -> SpectralInit:
    """Power iteration from a random start, renormalized every step.

    Renormalization avoids overflow for large s; a_s (the inverse of
    ||M^s v_tilde||) is recovered as the product of the per-step inverse
    norms.  lambda_max is the Rayleigh quotient after s further steps.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    n = M.shape[0]
    rng = substream(seed, "spectral-start")
    v_tilde = rng.standard_normal(n)
    v_tilde /= np.linalg.norm(v_tilde)

    y = v_tilde.copy()
    log_a = 0.0
    for _ in range(s):
        y = M @ y
        nrm = np.linalg.norm(y)
        log_a -= np.log(nrm)
        y /= nrm
    x1 = y.copy()
    for _ in range(s):
        y = M @ y
        y /= np.linalg.norm(y)
    lambda_max = float(y @ (M @ y))
    if lambda_max >= 2.0:
        lambda_tilde = (lambda_max + np.sqrt(lambda_max**2 - 4.0)) / 2.0
    else:
        lambda_tilde = float("nan")
    return SpectralInit(
        x1=x1,
        s=s,
        a_s=float(np.exp(log_a)),
        v_tilde=v_tilde,
        lambda_max=lambda_max,
        lambda_tilde=lambda_tilde,
        vhat=y,
    )


def sign_align(x: np.ndarray, v_star: np.ndarray) -> np.ndarray:
    """Flip x so that x . v_star >= 0 (ties keep +x).  Evaluation-only."""
    return -x if float(x @ v_star) < 0 else x
