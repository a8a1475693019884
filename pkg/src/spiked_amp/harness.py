"""Experiment orchestration: config, Monte Carlo trials, CSV emission.

An ExperimentConfig names one of six experiments; run_experiment executes the
trial-based ones (Z2Pipeline, SparsePipeline, SpectralCorrelation,
DecompAudit) and returns flat TrialRecord rows, while the two grid scans
(SeScan, KappaScan) go through run_scan and return ScanRow rows with the
bound and pass flag attached.  DecompAudit additionally exposes the full
per-iteration ledger summary through run_decomp_rows.

Determinism contract: every trial derives its own seed from (config.seed,
trial index), so results are byte-identical regardless of worker count or
scheduling.  Trials run on a process pool sized by SPIKED_AMP_WORKERS
(default: logical cores); a crashing trial contributes a single row with
metric_name "error_code" instead of poisoning the batch.

TrialRecord metric vocabulary (closed):
  alpha           signal coefficient; Z2 rows carry alpha_t of x_t, sparse
                  rows carry lam * <v*, eta_t(x_t)>, the coefficient of the
                  next iterate
  alpha_sq        alpha squared (Z2 rows, for SE comparison)
  tau_t           the SE reference for the same row's alpha/alpha_sq value
  xi_norm         decomposition residual norm at t
  l2_err          || (1/lam) ST_tau(x_T) - v* ||_2, final iterate only
  overlap         |<v*, x_t>| / ||x_t||
  score           sample-split winner's complement-block quadratic form
  w1_mixed        W1 distance of the mixed Gaussian component's coordinates
  max_phi_corr    largest off-diagonal |<phi_j, phi_k>| so far
  lambda_max      top-eigenvalue estimate from the power method
  eig_overlap_sq  squared correlation of the top eigenvector with v*
plus "error_code" for failed trials.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import decomp, se, sparse_init
from ._rng import derive_seed, substream
from .amp import default_power_steps, run_amp, spectral_init
from .denoise import default_tau, soft_threshold
from .model import SignalSpec, make_signal, make_spiked, sample_wigner

__all__ = [
    "ConfigError",
    "DecompRow",
    "EXPERIMENTS",
    "ExperimentConfig",
    "ScanRow",
    "SummaryRow",
    "TrialRecord",
    "aggregate",
    "build_config",
    "emit_csv",
    "load_config",
    "run_decomp_rows",
    "run_experiment",
    "run_scan",
    "worker_count",
]

EXPERIMENTS = (
    "Z2Pipeline",
    "SparsePipeline",
    "SeScan",
    "KappaScan",
    "DecompAudit",
    "SpectralCorrelation",
)

METRICS = frozenset(
    {
        "alpha",
        "alpha_sq",
        "tau_t",
        "xi_norm",
        "l2_err",
        "overlap",
        "score",
        "w1_mixed",
        "max_phi_corr",
        "lambda_max",
        "eig_overlap_sq",
        "error_code",
    }
)


class ConfigError(ValueError):
    """Bad experiment configuration (unknown key, missing field, bad value)."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 0
    lam: float = 0.0  # JSON/CLI name: "lambda"
    k: int = 0
    T: int = 0
    trials: int = 1
    seed: int = 0
    c_tau: float | None = None
    s_power: int | None = None
    p_split: float | None = None
    N_rounds: int | None = None
    init: str = ""
    quantity: str = ""
    output_path: str = ""


class TrialRecord(NamedTuple):
    trial_id: int
    t: int
    metric_name: str
    value: float


class ScanRow(NamedTuple):
    lam: float
    tau: float
    value: float
    bound: float
    pass_: int


class DecompRow(NamedTuple):
    # trial_id prepended to the ledger summary so multi-trial audits stay flat
    trial_id: int
    t: int
    alpha: float
    beta_norm: float
    xi_norm: float
    delta_norm: float
    Delta_abs: float
    max_phi_corr: float
    w1_mixed: float


class SummaryRow(NamedTuple):
    t: int
    metric_name: str
    median: float
    mean: float
    q10: float
    q90: float
    count: int


# ---------------------------------------------------------------------------
# configuration

_JSON_KEYS = {
    "experiment": str,
    "n": int,
    "lambda": float,
    "k": int,
    "T": int,
    "trials": int,
    "seed": int,
    "c_tau": float,
    "s_power": int,
    "p_split": float,
    "N_rounds": int,
    "init": str,
    "quantity": str,
    "output_path": str,
}

_FIELD_FOR_KEY = {"lambda": "lam"}

_TRIAL_EXPERIMENTS = ("Z2Pipeline", "SparsePipeline", "DecompAudit", "SpectralCorrelation")
_SCAN_EXPERIMENTS = ("SeScan", "KappaScan")


def load_config(path: str) -> dict:
    """Read the JSON config file; unknown keys are rejected here, not later."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    for key in data:
        if key not in _JSON_KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
    return data


def build_config(data: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Merge JSON data with CLI overrides (override wins) and validate."""
    merged = dict(data)
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _JSON_KEYS:
            raise ConfigError(f"unknown override key {key!r}")
        merged[key] = val
    if "experiment" not in merged:
        raise ConfigError("config is missing 'experiment'")
    kwargs = {}
    for key, val in merged.items():
        want = _JSON_KEYS[key]
        if want is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if not isinstance(val, want) or isinstance(val, bool):
            raise ConfigError(f"config key {key!r} must be {want.__name__}, got {val!r}")
        kwargs[_FIELD_FOR_KEY.get(key, key)] = val
    config = ExperimentConfig(**kwargs)
    _validate(config)
    return config


def _require(config: ExperimentConfig, **mins: float) -> None:
    for name, lo in mins.items():
        val = getattr(config, name)
        if val is None or val < lo:
            raise ConfigError(
                f"{config.experiment} requires {name} >= {lo}, got {val!r}"
            )


def _validate(config: ExperimentConfig) -> None:
    if config.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {config.experiment!r}")
    if config.trials < 1:
        raise ConfigError(f"trials must be >= 1, got {config.trials}")
    if config.seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    exp = config.experiment
    if exp == "Z2Pipeline":
        _require(config, n=2, T=1)
        if config.lam <= 1.0:
            raise ConfigError("Z2Pipeline needs lambda > 1 (spectral regime)")
    elif exp == "SparsePipeline":
        _require(config, n=2, k=1, T=1)
        if config.lam <= 0.0:
            raise ConfigError("SparsePipeline needs lambda > 0")
        if config.init not in ("", "independent", "split"):
            raise ConfigError(f"SparsePipeline init must be independent|split, got {config.init!r}")
    elif exp == "DecompAudit":
        _require(config, n=2, T=2)
        if config.lam <= 1.0:
            raise ConfigError("DecompAudit needs lambda > 1 (spectral regime)")
    elif exp == "SpectralCorrelation":
        _require(config, n=2)
        if config.lam <= 1.0:
            raise ConfigError("SpectralCorrelation needs lambda > 1")
    elif exp == "SeScan":
        if config.quantity not in ("", "fixed-point", "identity"):
            raise ConfigError(f"SeScan quantity must be fixed-point|identity, got {config.quantity!r}")
    elif exp == "KappaScan":
        if config.quantity not in ("", "kappa", "t2"):
            raise ConfigError(f"KappaScan quantity must be kappa|t2, got {config.quantity!r}")


# ---------------------------------------------------------------------------
# per-trial pipelines (top level so the process pool can pickle them)


def _z2_setup(config: ExperimentConfig, tseed: int):
    v = make_signal(SignalSpec(kind="z2", n=config.n, seed=tseed))
    model = make_spiked(config.lam, v, sample_wigner(config.n, tseed))
    s = config.s_power or default_power_steps(config.n, config.lam)
    init = spectral_init(model.observed, s, tseed)
    return model, init


def _z2_alpha(model, traj, t: int) -> float:
    # alpha_t, the v*-coefficient of x_t: direct for t=1, lam <v*, eta_{t-1}>
    # afterward (same formula the decomposition ledger records).
    if t == 1:
        return float(model.v_star @ traj.iterates[0])
    return model.lam * float(model.v_star @ traj.denoised[t - 2])


def _trial_z2(args: tuple[ExperimentConfig, int]) -> list[TrialRecord]:
    config, tid = args
    tseed = derive_seed(config.seed, "trial", tid)
    model, init = _z2_setup(config, tseed)
    x1 = config.lam * init.x1
    traj = run_amp(model, "tanh-z2", x1, init.x1, config.T)
    taus = se.se_z2_trajectory(config.lam, config.T, se.gauss_hermite()).values
    rows: list[TrialRecord] = []
    for t in range(1, len(traj.iterates) + 1):
        alpha = _z2_alpha(model, traj, t)
        x_t = traj.iterates[t - 1]
        rows.append(TrialRecord(tid, t, "alpha", alpha))
        rows.append(TrialRecord(tid, t, "alpha_sq", alpha * alpha))
        rows.append(TrialRecord(tid, t, "tau_t", float(taus[t - 1])))
        rows.append(TrialRecord(tid, t, "overlap",
                                abs(float(model.v_star @ x_t)) / float(np.linalg.norm(x_t))))
    if traj.failure is not None:
        rows.append(TrialRecord(tid, traj.failure[0], "error_code", 1.0))
    return rows


def _trial_sparse(args: tuple[ExperimentConfig, int]) -> list[TrialRecord]:
    config, tid = args
    tseed = derive_seed(config.seed, "trial", tid)
    n, k, lam = config.n, config.k, config.lam
    v = make_signal(SignalSpec(kind="sparse-dirac", n=n, k=k, seed=tseed))
    W = sample_wigner(n, tseed)
    model = make_spiked(lam, v, W)
    c_tau = config.c_tau if config.c_tau is not None else 2.0
    # Threshold scale follows the noise variance 1/n of the full matrix,
    # also when AMP runs on a sample-split complement block.
    tau = default_tau(n, c_tau)
    rows: list[TrialRecord] = []

    if config.init == "split":
        p, N, tau1 = sparse_init.default_split_params(n, k)
        if config.p_split is not None:
            p = config.p_split
        if config.N_rounds is not None:
            N = config.N_rounds
        chosen, x1 = sparse_init.sample_split_init(model, p, N, tau1, tseed)
        Ic = np.array(chosen.complement, dtype=np.intp)
        v_c = v[Ic]
        nv = float(np.linalg.norm(v_c))
        lam_eff = lam * nv * nv
        run_model = make_spiked(lam_eff, v_c / nv, W[np.ix_(Ic, Ic)])
        eta0 = np.zeros(Ic.size)
        alpha_start = abs(float(run_model.v_star @ x1))
        rows.append(TrialRecord(tid, 0, "score", chosen.score))
    else:
        g = substream(tseed, "init-g").standard_normal(n)
        x1 = lam * v + g / np.sqrt(n)
        run_model = model
        eta0 = np.zeros(n)
        lam_eff = lam
        alpha_start = lam

    traj = run_amp(run_model, "soft-threshold", x1, eta0, config.T, tau=tau)
    se_ref: tuple[float, ...] | None
    try:
        se_ref = se.se_sparse_trajectory(
            alpha_start, run_model.v_star, tau, lam_eff, config.T + 1
        ).values
    except (ValueError, se.DegenerateSeError):
        se_ref = None  # split start can be too cold for the SE map

    v_run = run_model.v_star
    for t in range(1, len(traj.denoised) + 1):
        x_t = traj.iterates[t - 1]
        eta_t = traj.denoised[t - 1]
        rows.append(TrialRecord(tid, t, "alpha", lam_eff * float(v_run @ eta_t)))
        if se_ref is not None:
            rows.append(TrialRecord(tid, t, "tau_t", float(se_ref[t])))
        rows.append(TrialRecord(tid, t, "overlap",
                                abs(float(v_run @ x_t)) / float(np.linalg.norm(x_t))))
    if traj.failure is None:
        T = config.T
        x_T = traj.iterates[T - 1]
        est = soft_threshold(x_T, tau) / lam_eff
        if float(est @ v_run) < 0:
            est = -est
        rows.append(TrialRecord(tid, T, "l2_err", float(np.linalg.norm(est - v_run))))
    else:
        rows.append(TrialRecord(tid, traj.failure[0], "error_code", 1.0))
    return rows


def _trial_spectral(args: tuple[ExperimentConfig, int]) -> list[TrialRecord]:
    config, tid = args
    tseed = derive_seed(config.seed, "trial", tid)
    model, init = _z2_setup(config, tseed)
    ov = float(model.v_star @ init.vhat)
    return [
        TrialRecord(tid, 0, "lambda_max", init.lambda_max),
        TrialRecord(tid, 0, "eig_overlap_sq", ov * ov),
    ]


def _trial_decomp(args: tuple[ExperimentConfig, int]) -> list[DecompRow]:
    config, tid = args
    tseed = derive_seed(config.seed, "trial", tid)
    model, init = _z2_setup(config, tseed)
    x1 = config.lam * init.x1
    traj = run_amp(model, "tanh-z2", x1, init.x1, config.T)
    if traj.failure is not None:
        raise RuntimeError(f"AMP degenerated at t={traj.failure[0]}: {traj.failure[1]}")
    ledger = decomp.build_ledger(model, traj, aux_seed=derive_seed(tseed, "ledger"))
    rows: list[DecompRow] = []
    for t in range(1, len(ledger.xis) + 1):
        diag = decomp.residual_diagnostics(ledger, model, traj, t)
        report = decomp.gaussianity_report(ledger, t=t)
        rows.append(
            DecompRow(
                trial_id=tid,
                t=t,
                alpha=ledger.alphas[t - 1],
                beta_norm=float(np.linalg.norm(ledger.betas[t - 1])),
                xi_norm=ledger.xi_norms[t - 1],
                delta_norm=diag.delta_norm,
                Delta_abs=diag.Delta_abs,
                max_phi_corr=report.max_phi_corr,
                w1_mixed=report.w1_mixed,
            )
        )
    return rows


def _trial_decomp_records(args: tuple[ExperimentConfig, int]) -> list[TrialRecord]:
    rows = _trial_decomp(args)
    records: list[TrialRecord] = []
    for r in rows:
        records.append(TrialRecord(r.trial_id, r.t, "alpha", r.alpha))
        records.append(TrialRecord(r.trial_id, r.t, "xi_norm", r.xi_norm))
        records.append(TrialRecord(r.trial_id, r.t, "max_phi_corr", r.max_phi_corr))
        records.append(TrialRecord(r.trial_id, r.t, "w1_mixed", r.w1_mixed))
    return records


_TRIAL_FNS = {
    "Z2Pipeline": _trial_z2,
    "SparsePipeline": _trial_sparse,
    "SpectralCorrelation": _trial_spectral,
    "DecompAudit": _trial_decomp_records,
}


def _run_one(packed):
    # Crash isolation: a failed trial yields a single error_code row and the
    # rest of the batch proceeds.
    fn_name, config, tid = packed
    try:
        return _TRIAL_FNS[fn_name]((config, tid))
    except Exception:
        return [TrialRecord(tid, 0, "error_code", 1.0)]


# ---------------------------------------------------------------------------
# orchestration


def worker_count() -> int:
    env = os.environ.get("SPIKED_AMP_WORKERS", "").strip()
    if env:
        try:
            w = int(env)
        except ValueError as exc:
            raise ConfigError(f"SPIKED_AMP_WORKERS must be an integer, got {env!r}") from exc
        if w < 1:
            raise ConfigError(f"SPIKED_AMP_WORKERS must be >= 1, got {w}")
        return w
    return os.cpu_count() or 1


def _map_trials(fn_name: str, config: ExperimentConfig) -> list:
    packed = [(fn_name, config, tid) for tid in range(config.trials)]
    w = min(worker_count(), config.trials)
    if w == 1:
        results = [_run_one(p) for p in packed]
    else:
        with ProcessPoolExecutor(max_workers=w) as pool:
            results = list(pool.map(_run_one, packed))
    return [row for sub in results for row in sub]


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    """All trials of a trial-based experiment, merged in trial order."""
    _validate(config)
    if config.experiment in _SCAN_EXPERIMENTS:
        raise ConfigError(
            f"{config.experiment} is a grid scan; use run_scan for ScanRow output"
        )
    return _map_trials(config.experiment, config)


def run_decomp_rows(config: ExperimentConfig) -> list[DecompRow]:
    """DecompAudit's full per-iteration ledger summary (one row per trial, t)."""
    _validate(config)
    if config.experiment != "DecompAudit":
        raise ConfigError("run_decomp_rows only serves DecompAudit configs")
    rows: list[DecompRow] = []
    for tid in range(config.trials):
        rows.extend(_trial_decomp((config, tid)))
    return rows


def run_scan(config: ExperimentConfig) -> list[ScanRow]:
    """Grid scans over (lambda, tau) with the matching bound per row."""
    _validate(config)
    q = se.gauss_hermite()
    rows: list[ScanRow] = []
    if config.experiment == "SeScan":
        quantity = config.quantity or "fixed-point"
        for lam in se.lambda_grid_z2():
            lam = float(lam)
            if quantity == "fixed-point":
                fp = se.se_z2_fixed_point(lam, q)
                ok = (lam * lam - 1.0) < fp.fixed_point < lam * lam
                rows.append(ScanRow(lam, fp.fixed_point, fp.fixed_point,
                                    lam * lam, int(ok)))
            else:  # identity: the two quadrature forms of the same moment
                for tau in se.tau_grid_z2(lam):
                    sq, lin = se.quad_identity_check(float(tau), lam, q)
                    gap = abs(sq - lin)
                    rows.append(ScanRow(lam, float(tau), gap, 1e-8, int(gap <= 1e-8)))
    elif config.experiment == "KappaScan":
        quantity = config.quantity or "kappa"
        for lam in se.lambda_grid_z2():
            lam = float(lam)
            for tau in se.tau_grid_z2(lam):
                tau = float(tau)
                if quantity == "kappa":
                    val = float(np.sqrt(se.kappa2_z2(lam, tau, q)))
                    bound = se.kappa_bound_z2(lam)
                    ok = val <= bound
                else:
                    val = se.t2_z2(lam, tau, q)
                    bound = se.t2_bound_z2(lam)
                    ok = 0.0 <= val <= bound
                rows.append(ScanRow(lam, tau, val, bound, int(ok)))
    else:
        raise ConfigError(f"{config.experiment} is not a scan experiment")
    return rows


def aggregate(records: list[TrialRecord]) -> list[SummaryRow]:
    """Per (t, metric) median, mean, and 10/90 quantiles, sorted."""
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[int, str], list[float]] = {}
    for r in records:
        groups.setdefault((r.t, r.metric_name), []).append(r.value)
    out = []
    for (t, name) in sorted(groups):
        vals = np.array(groups[(t, name)])
        out.append(
            SummaryRow(
                t=t,
                metric_name=name,
                median=float(np.median(vals)),
                mean=float(np.mean(vals)),
                q10=float(np.quantile(vals, 0.10)),
                q90=float(np.quantile(vals, 0.90)),
                count=vals.size,
            )
        )
    return out


# ---------------------------------------------------------------------------
# CSV

_HEADER_ALIASES = {"lam": "lambda", "pass_": "pass"}


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def emit_csv(rows: list, path: str, row_type: type | None = None) -> None:
    """Write NamedTuple rows as CSV: 12 significant digits, "\\n" newlines.

    row_type supplies the header when rows is empty; otherwise the first
    row's class is used.  No locale, no quoting (the vocabulary is plain).
    """
    if row_type is None:
        if not rows:
            raise ValueError("empty rows need an explicit row_type for the header")
        row_type = type(rows[0])
    names = [_HEADER_ALIASES.get(f, f) for f in row_type._fields]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(names) + "\n")
            for row in rows:
                fh.write(",".join(_format_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc
