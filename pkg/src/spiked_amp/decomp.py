"""Exact signal / Gaussian / residual bookkeeping for an AMP run.

Alongside a trajectory x_1..x_T this module maintains:

* an orthonormal basis z_k grown by Gram-Schmidt from the denoised iterates,
* the noise matrix with those directions projected out (W_k sequence),
* augmentation vectors zeta_k and synthesized Gaussians phi_k = W_k z_k + zeta_k,
* and per-iteration coefficients so that

      x_{t+1} = alpha_{t+1} v* + sum_k beta_t^k phi_k + xi_t

holds exactly, with xi_t inside span(z_0.., z_t) up to float roundoff.

When the run's step-0 convention eta_0(x_0) is a multiple of x_1 (the
spectrally initialized pipeline), the basis is seeded with z_0 = x_1/||x_1||
before the loop; the exactness above then covers every recorded t, while
x_1's own expansion residual is only measured, not constructed.  The seeded
vectors sit at the front of the flat basis list and `offset` counts them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import denoise
from ._rng import substream
from .amp import AmpTrajectory
from .model import SpikedModel

__all__ = [
    "BasisDegenerateError",
    "DecompositionLedger",
    "GaussianityReport",
    "LedgerInconsistencyError",
    "ResidualDiagnostics",
    "build_ledger",
    "coordinate_w1",
    "extend_basis",
    "gaussianity_report",
    "ledger_init",
    "project_w",
    "record_iteration",
    "residual_diagnostics",
    "synthesize_phi",
]

# Coefficient of the z_k-direction variance correction in zeta_k.  The
# diagonal of W has twice the off-diagonal variance, so W_k z_k is inflated
# along z_k by exactly this factor's worth.
_DIAG_FIX = np.sqrt(2.0) / 2.0 - 1.0

_SPAN_TOL = 1e-8


class BasisDegenerateError(RuntimeError):
    """The next denoised iterate is numerically inside the current span."""


class LedgerInconsistencyError(RuntimeError):
    """The residual left the basis span: a bookkeeping bug, not statistics."""


@dataclass
class DecompositionLedger:
    aux_seed: int
    basis: list[np.ndarray] = field(default_factory=list)
    projected: np.ndarray | None = None  # current W_k
    zetas: list[np.ndarray] = field(default_factory=list)
    phis: list[np.ndarray] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)  # alpha_{t+1} per record
    betas: list[np.ndarray] = field(default_factory=list)
    xi_norms: list[float] = field(default_factory=list)
    xis: list[np.ndarray] = field(default_factory=list)
    leaks: list[float] = field(default_factory=list)
    offset: int = 0  # seeded basis vectors in front of z_1
    # raw pieces of each zeta_k, kept for the exact residual identities
    gs: list[np.ndarray] = field(default_factory=list)
    zwz: list[float] = field(default_factory=list)
    n_projected: int = 0  # basis vectors already folded into `projected`


def ledger_init(model: SpikedModel, aux_seed: int) -> DecompositionLedger:
    return DecompositionLedger(aux_seed=aux_seed, projected=model.noise.copy())


def extend_basis(ledger: DecompositionLedger, eta_xt: np.ndarray) -> np.ndarray:
    """Append the normalized Gram-Schmidt residual of eta_xt to the basis."""
    r = np.array(eta_xt, dtype=np.float64)
    for _ in range(2):  # twice is enough to hold orthogonality at 1e-10
        for z in ledger.basis:
            r -= (z @ r) * z
    nrm = float(np.linalg.norm(r))
    if nrm <= 1e-12:
        raise BasisDegenerateError(
            f"iterate is in the span of the current {len(ledger.basis)} basis vectors"
        )
    z = r / nrm
    ledger.basis.append(z)
    return z


def project_w(ledger: DecompositionLedger) -> None:
    """Fold every not-yet-applied basis vector into the projected matrix."""
    pending = ledger.basis[ledger.n_projected :]
    if not pending:
        raise ValueError("no basis vector added since the last projection")
    W = ledger.projected
    for z in pending:
        w = W @ z
        q = float(z @ w)
        # (I - zz^T) W (I - zz^T) as a symmetric rank-2 correction
        W -= np.outer(z, w) + np.outer(w, z) - q * np.outer(z, z)
    ledger.n_projected = len(ledger.basis)


def synthesize_phi(ledger: DecompositionLedger, k: int) -> np.ndarray:
    """Build phi_k = W_k z_k + zeta_k for the newest basis vector.

    Must be called before project_w folds z_k away; k is the flat ledger
    index (seeded vectors included) and only exists to catch misuse.
    """
    if k != len(ledger.basis) - 1:
        raise ValueError(f"expected the newest index {len(ledger.basis) - 1}, got {k}")
    if ledger.n_projected != k:
        raise ValueError("projected matrix is out of step with the basis")
    if len(ledger.phis) != k:
        raise ValueError(f"phi_{k} was already synthesized")
    z = ledger.basis[k]
    n = z.shape[0]
    Wz = ledger.projected @ z
    q = float(z @ Wz)
    g = substream(ledger.aux_seed, "phi-g", k).normal(0.0, 1.0 / np.sqrt(n), size=k)
    zeta = _DIAG_FIX * q * z
    for i in range(k):
        zeta = zeta + g[i] * ledger.basis[i]
    phi = Wz + zeta
    ledger.zetas.append(zeta)
    ledger.phis.append(phi)
    ledger.gs.append(g)
    ledger.zwz.append(q)
    return phi


def record_iteration(
    ledger: DecompositionLedger,
    model: SpikedModel,
    trajectory: AmpTrajectory,
    t: int,
) -> None:
    """Decompose x_{t+1}; appends alpha_{t+1}, beta_t, xi_t and its norm."""
    if t < 1 or t >= len(trajectory.iterates):
        raise ValueError(f"trajectory holds no x_{t + 1}")
    eta_t = trajectory.denoised[t - 1]
    x_next = trajectory.iterates[t]
    L = ledger.offset + t
    if len(ledger.basis) < L or len(ledger.phis) < L:
        raise ValueError(f"ledger has not been extended through iteration {t}")
    U = np.stack(ledger.basis[:L], axis=1)
    Phi = np.stack(ledger.phis[:L], axis=1)
    beta = U.T @ eta_t
    alpha_next = model.lam * float(model.v_star @ eta_t)
    xi = x_next - alpha_next * model.v_star - Phi @ beta
    leak = float(np.linalg.norm(xi - U @ (U.T @ xi)))
    if leak > _SPAN_TOL:
        raise LedgerInconsistencyError(
            f"xi_{t} leaks {leak:.3e} outside the basis span (tolerance {_SPAN_TOL:g})"
        )
    ledger.alphas.append(alpha_next)
    ledger.betas.append(beta)
    ledger.xis.append(xi)
    ledger.xi_norms.append(float(np.linalg.norm(xi)))
    ledger.leaks.append(leak)


def build_ledger(
    model: SpikedModel,
    trajectory: AmpTrajectory,
    aux_seed: int,
    seed_basis_with_x1: bool | None = None,
) -> DecompositionLedger:
    """Replay a finished run: one basis vector, one phi, one record per t.

    seed_basis_with_x1 defaults to whether the run's eta_0(x_0) is nonzero,
    which is exactly when a z_0 = x_1 direction is needed for the residuals
    to stay inside the span.
    """
    if seed_basis_with_x1 is None:
        seed_basis_with_x1 = bool(np.any(trajectory.eta0_of_x0 != 0.0))
    ledger = ledger_init(model, aux_seed)
    if seed_basis_with_x1:
        extend_basis(ledger, trajectory.iterates[0])
        synthesize_phi(ledger, 0)
        project_w(ledger)
        ledger.offset = 1
    n_records = len(trajectory.iterates) - 1
    for t in range(1, n_records + 1):
        extend_basis(ledger, trajectory.denoised[t - 1])
        synthesize_phi(ledger, ledger.offset + t - 1)
        record_iteration(ledger, model, trajectory, t)
        project_w(ledger)
    return ledger


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class GaussianityReport:
    max_phi_corr: float
    phi_coord_w1: tuple[float, ...]
    w1_mixed: float


def coordinate_w1(x: np.ndarray, var: float) -> float:
    """W1 distance of the empirical coordinate law to N(0, var).

    Sorted-quantile coupling: both laws are matched at the (i - 1/2)/n
    quantiles, which is the optimal transport plan in one dimension.
    """
    n = x.shape[0]
    q = norm.ppf((np.arange(1, n + 1) - 0.5) / n) * np.sqrt(var)
    return float(np.mean(np.abs(np.sort(x) - q)))


def gaussianity_report(
    ledger: DecompositionLedger, t: int | None = None
) -> GaussianityReport:
    """Correlation and W1 summaries of the synthesized phis.

    With t given, the report is restricted to the ledger's state just after
    iteration t was recorded (first offset + t phis, beta_t for the mix);
    default is the full ledger with the latest beta.
    """
    if t is None:
        upto = len(ledger.phis)
        beta = ledger.betas[-1] if ledger.betas else None
    else:
        if t < 1 or t > len(ledger.betas):
            raise ValueError(f"no recorded iteration {t}")
        upto = ledger.offset + t
        beta = ledger.betas[t - 1]
    if upto < 2:
        raise ValueError("need at least two phi vectors")
    Phi = np.stack(ledger.phis[:upto], axis=1)
    n = Phi.shape[0]
    gram = Phi.T @ Phi
    off = gram[~np.eye(gram.shape[0], dtype=bool)]
    w1s = tuple(coordinate_w1(Phi[:, j], 1.0 / n) for j in range(Phi.shape[1]))
    if beta is not None:
        mixed = Phi[:, : beta.shape[0]] @ beta / np.linalg.norm(beta)
        w1_mixed = coordinate_w1(mixed, 1.0 / n)
    else:
        w1_mixed = float("nan")
    return GaussianityReport(
        max_phi_corr=float(np.max(np.abs(off))),
        phi_coord_w1=w1s,
        w1_mixed=w1_mixed,
    )


@dataclass(frozen=True)
class ResidualDiagnostics:
    t: int
    xi_norm: float
    delta_norm: float
    delta_prime_avg: float
    Delta_abs: float
    mu: np.ndarray


def residual_diagnostics(
    ledger: DecompositionLedger,
    model: SpikedModel,
    trajectory: AmpTrajectory,
    t: int,
) -> ResidualDiagnostics:
    """Size up the residual recursion's driving terms at iteration t.

    v_t is the iterate with its own residual removed; delta_t measures how
    far the denoiser moves when that residual is added back, and Delta_t is
    the centered cross term between the residual direction and the phis.
    """
    if t < 1 or t > len(ledger.xis):
        raise ValueError(f"no recorded decomposition for iteration {t}")
    eta_prev = trajectory.denoised[t - 2] if t >= 2 else trajectory.eta0_of_x0
    L_prev = ledger.offset + t - 1
    L = ledger.offset + t
    alpha_t = model.lam * float(model.v_star @ eta_prev)
    beta_prev = np.array([ledger.basis[j] @ eta_prev for j in range(L_prev)])
    v_t = alpha_t * model.v_star
    if L_prev:
        v_t = v_t + np.stack(ledger.phis[:L_prev], axis=1) @ beta_prev

    state = trajectory.states[t - 1]  # the state fitted on x_t
    eta_v = denoise.apply(state, v_t)
    delta = trajectory.denoised[t - 1] - eta_v
    delta_prime = trajectory.onsager[t - 1] - denoise.derivative_avg(state, v_t)
    eta_v_prime = denoise.derivative_avg(state, v_t)

    xi = ledger.xis[t - 1]
    xi_norm = ledger.xi_norms[t - 1]
    mu = np.array([ledger.basis[j] @ xi for j in range(L)]) / xi_norm
    Delta = sum(
        mu[k] * (float(ledger.phis[k] @ eta_v) - eta_v_prime * beta_prev[k])
        for k in range(L_prev)
    )
    return ResidualDiagnostics(
        t=t,
        xi_norm=xi_norm,
        delta_norm=float(np.linalg.norm(delta)),
        delta_prime_avg=float(delta_prime),
        Delta_abs=abs(float(Delta)),
        mu=mu,
    )
