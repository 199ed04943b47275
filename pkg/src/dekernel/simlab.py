"""Reproducible Monte-Carlo lab: data generation, sparse designs, and
the six-method comparison protocol with dual-scale error tables.

Every replicate draws from its own deterministic substream derived
from (master_seed, replicate_index), so reports are bit-identical no
matter how replicates are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as dio
from .bandwidth import (
    DesignDensity,
    NoiseSpec,
    loocv_bandwidth,
    optimal_bandwidth_direct,
)
from .dataset import Dataset
from .defit import FitRequest, _fit_arrays, de_fit_at
from .errors import ConfigInvalid, DekernelError, IndexOutOfRange
from .growth import QuasiExpModel, solution
from .inference import (
    ParamEstimate,
    estimate_alpha,
    estimate_lambda,
    log_trajectory,
    nls_solution_fit,
)
from .kernels import KernelSpec
from .localpoly import local_poly_fit_at

METHOD_NAMES = ("NW", "LL", "LQ", "DE1", "DE2", "NLS")
_POLY_DEGREE = {"NW": 0, "LL": 1, "LQ": 2}
_DE_DEGREE = {"DE1": 1, "DE2": 2}
_THEOREM3_DEGREE = {"NW": 0, "LL": 1, "LQ": 2, "DE1": 1, "DE2": 2}

DEFAULT_LOOCV_FRACTIONS = (0.12, 0.18, 0.27, 0.40, 0.60, 0.85, 1.0)


@dataclass(frozen=True)
class DesignSpec:
    kind: str  # "equispaced" | "uniform_random" | "explicit"
    a: float = 0.0
    b: float = 1.0
    points: Optional[tuple] = None

    def fixed_points(self, n: int) -> Optional[np.ndarray]:
        """Design points when they do not vary across replicates."""
        if self.kind == "explicit":
            return np.asarray(self.points, dtype=float)
        if self.kind == "equispaced":
            # midpoint grid: empirical density is exactly uniform on [a, b]
            i = np.arange(1, n + 1)
            return self.a + (i - 0.5) * (self.b - self.a) / n
        return None

    def interval(self) -> tuple[float, float]:
        if self.kind == "explicit":
            pts = np.asarray(self.points, dtype=float)
            return float(pts[0]), float(pts[-1])
        return self.a, self.b


@dataclass(frozen=True)
class BandwidthRule:
    mode: str  # "fixed" | "loocv" | "theorem3"
    h: Optional[float] = None
    grid: Optional[tuple] = None


@dataclass(frozen=True)
class PseudoTruthSpec:
    mode: str  # "explicit_solution" | "local_linear_on_full_data"
    data_x: Optional[tuple] = None
    data_y: Optional[tuple] = None  # linear-scale responses of the base dataset
    bandwidth: Optional[float] = None


@dataclass
class ScenarioConfig:
    n: int
    design: DesignSpec
    noise_sd_log: float
    replicates: int
    master_seed: int
    model: Optional[QuasiExpModel] = None
    scale: str = "log"
    removed_indices: tuple = ()
    kernel: KernelSpec = field(default_factory=KernelSpec)
    methods: tuple = METHOD_NAMES
    bandwidths: dict = field(default_factory=dict)  # name or "default" -> BandwidthRule
    pseudo_truth: PseudoTruthSpec = PseudoTruthSpec("explicit_solution")
    param_estimation: str = "per_replicate"  # or "fixed"
    # NLS comparator flavor: "two_step" predicts the trajectory from the
    # slope/scale estimates as-is; the refine modes polish on log residuals
    nls_mode: str = "two_step"  # | "refine_lambda" | "refine_joint"

    def __post_init__(self):
        if self.n < 1:
            raise ConfigInvalid("n: must be >= 1")
        if self.noise_sd_log <= 0.0:
            raise ConfigInvalid("noise_sd_log: must be > 0")
        if self.replicates < 1:
            raise ConfigInvalid("replicates: must be >= 1")
        if self.scale not in ("linear", "log"):
            raise ConfigInvalid(f"scale: must be 'linear' or 'log', got {self.scale!r}")
        seen = set()
        for idx in self.removed_indices:
            if not 1 <= idx <= self.n:
                raise ConfigInvalid(
                    f"removed_indices: {idx} outside [1, {self.n}]"
                )
            if idx in seen:
                raise ConfigInvalid(f"removed_indices: duplicate index {idx}")
            seen.add(idx)
        for m in self.methods:
            if m not in METHOD_NAMES:
                raise ConfigInvalid(f"methods: unknown method {m!r}")
        if self.param_estimation not in ("per_replicate", "fixed"):
            raise ConfigInvalid(
                f"param_estimation: must be 'per_replicate' or 'fixed', "
                f"got {self.param_estimation!r}"
            )
        if self.nls_mode not in ("two_step", "refine_lambda", "refine_joint"):
            raise ConfigInvalid(f"nls_mode: unknown mode {self.nls_mode!r}")
        pt = self.pseudo_truth
        if pt.mode == "explicit_solution":
            if self.model is None:
                raise ConfigInvalid("model: required when pseudo_truth is explicit_solution")
        elif pt.mode == "local_linear_on_full_data":
            if pt.data_x is None or pt.data_y is None:
                raise ConfigInvalid("pseudo_truth: base dataset required")
            if pt.bandwidth is None or pt.bandwidth <= 0.0:
                raise ConfigInvalid("pseudo_truth.bandwidth: must be > 0")
            if self.design.kind != "explicit":
                raise ConfigInvalid(
                    "design.kind: must be 'explicit' when pseudo_truth is "
                    "local_linear_on_full_data"
                )
            if len(pt.data_x) != len(self.design.points or ()):
                raise ConfigInvalid(
                    "pseudo_truth: base dataset must live on the design points"
                )
        else:
            raise ConfigInvalid(f"pseudo_truth.mode: unknown mode {pt.mode!r}")
        if self.design.kind not in ("equispaced", "uniform_random", "explicit"):
            raise ConfigInvalid(f"design.kind: unknown kind {self.design.kind!r}")
        if self.design.kind == "explicit":
            pts = self.design.points
            if not pts or len(pts) != self.n:
                raise ConfigInvalid("design.points: need exactly n points")

    def bandwidth_rule(self, method: str) -> BandwidthRule:
        if method in self.bandwidths:
            return self.bandwidths[method]
        if "default" in self.bandwidths:
            return self.bandwidths["default"]
        lo, hi = self.design.interval()
        span = hi - lo
        return BandwidthRule("loocv", grid=tuple(f * span for f in DEFAULT_LOOCV_FRACTIONS))

    def density(self) -> DesignDensity:
        lo, hi = self.design.interval()
        return DesignDensity.uniform(lo, hi)


class _Runtime:
    """Per-run precomputation shared by all replicates (read-only)."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.x_fixed = config.design.fixed_points(config.n)
        self.truth_fixed = (
            pseudo_truth_values(config, self.x_fixed)
            if self.x_fixed is not None
            else None
        )


def pseudo_truth_values(config: ScenarioConfig, x) -> np.ndarray:
    """Reference curve on the working scale at the points ``x``."""
    x = np.asarray(x, dtype=float)
    pt = config.pseudo_truth
    if pt.mode == "explicit_solution":
        g = np.array([solution(config.model, xi) for xi in x])
        return np.log(g) if config.scale == "log" else g
    base = Dataset(np.asarray(pt.data_x, float), np.asarray(pt.data_y, float))
    z = base.working_values(config.scale)
    ref = Dataset(base.x, z, config.scale)
    vals = np.empty(x.size)
    for i, xi in enumerate(x):
        vals[i], _, _ = local_poly_fit_at(ref, float(xi), 1, config.kernel, pt.bandwidth)
    return vals


def replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    return np.random.default_rng((int(master_seed), int(replicate_index)))


def generate_dataset(config: ScenarioConfig, replicate_index: int) -> Dataset:
    """One simulated dataset on the working scale (deterministic substream)."""
    if not 1 <= replicate_index <= config.replicates:
        raise ConfigInvalid(
            f"replicate_index {replicate_index} outside [1, {config.replicates}]"
        )
    rng = replicate_rng(config.master_seed, replicate_index)
    if config.design.kind == "uniform_random":
        x = np.sort(rng.uniform(config.design.a, config.design.b, config.n))
        mean = pseudo_truth_values(config, x)
    else:
        runtime = _Runtime(config)
        x, mean = runtime.x_fixed, runtime.truth_fixed
    noise = rng.normal(0.0, config.noise_sd_log, config.n)
    return Dataset(x, mean + noise, config.scale)


def apply_sparse_design(data: Dataset, removed_indices) -> tuple[Dataset, Dataset]:
    """Split into (train, holdout) by 1-based removal indices."""
    removed = list(removed_indices)
    n = len(data)
    for idx in removed:
        if not 1 <= idx <= n:
            raise IndexOutOfRange(f"removal index {idx} outside [1, {n}]")
    if len(set(removed)) != len(removed):
        raise IndexOutOfRange("removal indices must be distinct")
    pos = sorted(i - 1 for i in removed)
    keep = [i for i in range(n) if i not in set(pos)]
    if not keep:
        raise IndexOutOfRange("cannot remove every data point")
    train = Dataset(data.x[keep], data.y[keep], data.scale)
    holdout_x = data.x[pos] if pos else np.empty(0)
    holdout_y = data.y[pos] if pos else np.empty(0)
    holdout = _maybe_empty_dataset(holdout_x, holdout_y, data.scale)
    return train, holdout


class _EmptyDataset:
    """Zero-length stand-in (Dataset requires >= 1 point)."""

    def __init__(self, scale):
        self.x = np.empty(0)
        self.y = np.empty(0)
        self.scale = scale

    def __len__(self):
        return 0


def _maybe_empty_dataset(x, y, scale):
    if len(x) == 0:
        return _EmptyDataset(scale)
    return Dataset(x, y, scale)


def _estimate_params(train: Dataset):
    alpha_hat, _ = estimate_alpha(train)
    lam_hat = estimate_lambda(train, alpha_hat)
    return alpha_hat, lam_hat


def _poly_loocv_fn(degree, kernel):
    def fit(train, x0, h):
        est, _, _ = local_poly_fit_at(train, x0, degree, kernel, h)
        return est

    return fit


def _de_loocv_fn(model, k, kernel, scale):
    def fit(train, x0, h):
        req = FitRequest(model, k, kernel, h, scale)
        return de_fit_at(train, x0, req).estimate

    return fit


def _resolve_bandwidth(config, rule, method, train, model_for_de, eval_points=()):
    if rule.mode == "fixed":
        if rule.h is None or rule.h <= 0.0:
            raise ConfigInvalid(f"bandwidths.{method}.h: must be > 0")
        return rule.h
    if rule.mode == "loocv":
        grid = rule.grid
        if not grid:
            raise ConfigInvalid(f"bandwidths.{method}.grid: required for loocv")
        if method in _POLY_DEGREE:
            fn = _poly_loocv_fn(_POLY_DEGREE[method], config.kernel)
        else:
            fn = _de_loocv_fn(model_for_de, _DE_DEGREE[method], config.kernel, config.scale)
        # candidate windows must at least reach the prediction locations;
        # their x-positions are part of the experiment design, so this
        # filter uses no response information
        feasible = [h for h in grid
                    if all(_fit_ok(fn, train, float(x0), h) for x0 in eval_points)]
        if not feasible:
            raise AllBandwidthsInfeasible(
                f"{method}: no candidate bandwidth reaches every evaluation point"
            )
        return loocv_bandwidth(train, fn, feasible)
    if rule.mode == "theorem3":
        if config.model is None:
            raise ConfigInvalid("model: required for theorem3 bandwidths")
        return None  # resolved per evaluation point
    raise ConfigInvalid(f"bandwidths.{method}.mode: unknown mode {rule.mode!r}")


def _fit_ok(fn, train, x0, h) -> bool:
    try:
        fn(train, x0, h)
        return True
    except DekernelError:
        return False


def _theorem3_h(config, method, x0):
    k = _THEOREM3_DEGREE[method]
    return optimal_bandwidth_direct(
        config.model, x0, k, config.n, NoiseSpec(config.noise_sd_log),
        config.kernel, config.density(),
    )


def _predict_method(config, method, train, xs, params):
    """Working-scale predictions of one method at points xs."""
    rule = config.bandwidth_rule(method)
    if method in _POLY_DEGREE:
        degree = _POLY_DEGREE[method]
        h = _resolve_bandwidth(config, rule, method, train, None, xs)
        out = np.empty(len(xs))
        for i, x0 in enumerate(xs):
            hh = h if h is not None else _theorem3_h(config, method, float(x0))
            out[i], _, _ = local_poly_fit_at(train, float(x0), degree, config.kernel, hh)
        return out
    if method in _DE_DEGREE:
        alpha_hat, lam_hat = params
        model = QuasiExpModel(alpha_hat, lam_hat, 1.0)  # g0 unused by local fits
        h = _resolve_bandwidth(config, rule, method, train, model, xs)
        k = _DE_DEGREE[method]
        out = np.empty(len(xs))
        for i, x0 in enumerate(xs):
            hh = h if h is not None else _theorem3_h(config, method, float(x0))
            req = FitRequest(model, k, config.kernel, hh, config.scale)
            out[i] = de_fit_at(train, float(x0), req).estimate
        return out
    if method == "NLS":
        alpha_hat, lam_hat = params
        y_lin = train.working_values("linear")
        g0 = 1e-8 * float(np.max(y_lin))
        if config.nls_mode == "two_step":
            a_fit, l_fit = alpha_hat, lam_hat
        else:
            init = ParamEstimate(alpha_hat, lam_hat, 1.0 / (1.0 - alpha_hat), math.inf)
            est, _, _ = nls_solution_fit(
                train, init, refine_alpha=config.nls_mode == "refine_joint", g0=g0
            )
            a_fit, l_fit = est.alpha_hat, est.lambda_hat
        G, base = log_trajectory(a_fit, l_fit, g0, np.asarray(xs, float))
        if np.any(base <= 0.0) or not np.all(np.isfinite(G)):
            raise DekernelError("fitted trajectory undefined at a holdout point")
        return G
    raise ConfigInvalid(f"methods: unknown method {method!r}")


def _replicate_record(config: ScenarioConfig, runtime: _Runtime, rep: int,
                      fixed_params) -> dict:
    data = generate_dataset(config, rep)
    train, holdout = apply_sparse_design(data, config.removed_indices)
    truth = (
        runtime.truth_fixed[[i - 1 for i in sorted(config.removed_indices)]]
        if runtime.truth_fixed is not None
        else pseudo_truth_values(config, holdout.x)
    )
    record: dict = {"replicate": rep, "results": {}}

    params = fixed_params
    params_error = None
    needs_params = any(m in _DE_DEGREE or m == "NLS" for m in config.methods)
    if needs_params and params is None:
        try:
            params = _estimate_params(train)
        except (DekernelError, ValueError) as exc:
            params_error = f"{type(exc).__name__}: {exc}"

    for method in config.methods:
        try:
            if (method in _DE_DEGREE or method == "NLS") and params is None:
                raise DekernelError(params_error or "parameter estimation failed")
            preds = _predict_method(config, method, train, holdout.x, params)
            err_work = preds - truth
            ase_work = float(np.mean(err_work ** 2))
            if config.scale == "log":
                err_orig = np.exp(preds) - np.exp(truth)
                ase_log, ase_orig = ase_work, float(np.mean(err_orig ** 2))
            else:
                ase_log, ase_orig = None, ase_work
            record["results"][method] = {
                "ase_log": ase_log,
                "ase_original": ase_orig,
            }
        except (DekernelError, ValueError) as exc:
            record["results"][method] = {"error": f"{type(exc).__name__}: {exc}"}
    return record


@dataclass
class MethodSummary:
    mean_ase_log: Optional[float]
    mean_ase_original: Optional[float]
    failures: int
    replicates_used: int


@dataclass
class StudyReport:
    master_seed: int
    methods: dict
    replicate_records: list
    config_echo: dict

    def table_rows(self):
        rows = []
        for name in self.config_echo.get("methods", list(self.methods)):
            s = self.methods[name]
            rows.append([
                name,
                s.mean_ase_log if s.mean_ase_log is not None else "",
                s.mean_ase_original if s.mean_ase_original is not None else "",
                s.failures,
            ])
        return rows

    def as_dict(self):
        return {
            "master_seed": self.master_seed,
            "config": self.config_echo,
            "methods": {
                name: {
                    "mean_ase_log": s.mean_ase_log,
                    "mean_ase_original": s.mean_ase_original,
                    "failures": s.failures,
                    "replicates_used": s.replicates_used,
                }
                for name, s in self.methods.items()
            },
            "replicates": self.replicate_records,
        }


def run_comparison(config: ScenarioConfig, threads: int = 1,
                   config_echo: Optional[dict] = None) -> StudyReport:
    """Monte-Carlo method comparison on the sparse-design protocol."""
    if config.scale != "log":
        raise ConfigInvalid("scale: the comparison protocol runs on the log scale")
    if not config.removed_indices:
        raise ConfigInvalid("removed_indices: holdout must be non-empty")
    if not config.methods:
        raise ConfigInvalid("methods: need at least one method")
    runtime = _Runtime(config)

    fixed_params = None
    if config.param_estimation == "fixed":
        pt = config.pseudo_truth
        if pt.mode == "local_linear_on_full_data":
            base = Dataset(np.asarray(pt.data_x, float), np.asarray(pt.data_y, float))
            fixed_params = _estimate_params(base.on_scale(config.scale))
        else:
            fixed_params = (config.model.alpha, config.model.lam)

    reps = range(1, config.replicates + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(
                lambda r: _replicate_record(config, runtime, r, fixed_params), reps
            ))
    else:
        records = [_replicate_record(config, runtime, r, fixed_params) for r in reps]

    methods = {}
    for name in config.methods:
        logs, origs, failures = [], [], 0
        for rec in records:
            res = rec["results"][name]
            if "error" in res:
                failures += 1
            else:
                logs.append(res["ase_log"])
                origs.append(res["ase_original"])
        methods[name] = MethodSummary(
            mean_ase_log=float(np.mean(logs)) if logs else None,
            mean_ase_original=float(np.mean(origs)) if origs else None,
            failures=failures,
            replicates_used=len(logs),
        )
    return StudyReport(
        master_seed=config.master_seed,
        methods=methods,
        replicate_records=records,
        config_echo=config_echo or {"methods": list(config.methods)},
    )


@dataclass
class MCBiasVariance:
    empirical_bias: float
    empirical_variance: float
    se_bias: float
    se_variance: float
    truth: float
    replicates: int


def mc_bias_variance(
    config: ScenarioConfig,
    x0: float,
    degree: int = 1,
    bandwidth: Optional[float] = None,
    estimator: str = "de",
    threads: int = 1,
) -> MCBiasVariance:
    """Empirical bias/variance of an estimator at x0 over the replicates.

    Requires pseudo_truth = explicit_solution; the estimator uses the
    true model parameters (theorem-check mode). ``bandwidth=None``
    takes the degree-k direct optimum at x0.
    """
    if config.pseudo_truth.mode != "explicit_solution":
        raise ConfigInvalid("pseudo_truth.mode: theorem checks need explicit_solution")
    runtime = _Runtime(config)
    if runtime.x_fixed is None:
        raise ConfigInvalid("design.kind: theorem checks need a fixed design")
    h = bandwidth if bandwidth is not None else _theorem3_h_for_degree(config, degree, x0)
    g_truth = solution(config.model, x0)
    truth = math.log(g_truth) if config.scale == "log" else g_truth

    x = runtime.x_fixed
    mean = runtime.truth_fixed
    # fixed design: precompute the positively-weighted window once
    pad = h * (1.0 + 1e-12)
    lo = np.searchsorted(x, x0 - pad, side="left")
    hi = np.searchsorted(x, x0 + pad, side="right")
    xw = np.ascontiguousarray(x[lo:hi])
    mw = mean[lo:hi]
    sd = config.noise_sd_log

    if estimator == "de":
        req = FitRequest(config.model, degree, config.kernel, h, config.scale)

        def one(rep):
            rng = replicate_rng(config.master_seed, rep)
            noise = rng.normal(0.0, sd, config.n)
            z = mw + noise[lo:hi]
            full = _fit_arrays(xw, z, x0, req)
            if full.status in ("insufficient_data", "left_domain"):
                raise DekernelError(f"replicate {rep}: {full.status}")
            return full.estimate

    elif estimator == "poly":
        def one(rep):
            rng = replicate_rng(config.master_seed, rep)
            noise = rng.normal(0.0, sd, config.n)
            data = Dataset(xw, mw + noise[lo:hi], config.scale)
            est, _, _ = local_poly_fit_at(data, x0, degree, config.kernel, h)
            return est

    else:
        raise ConfigInvalid(f"estimator: unknown kind {estimator!r}")

    reps = range(1, config.replicates + 1)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            estimates = np.fromiter(pool.map(one, reps), dtype=float,
                                    count=config.replicates)
    else:
        estimates = np.fromiter((one(r) for r in reps), dtype=float,
                                count=config.replicates)

    nrep = config.replicates
    var = float(np.var(estimates, ddof=1)) if nrep > 1 else 0.0
    return MCBiasVariance(
        empirical_bias=float(np.mean(estimates) - truth),
        empirical_variance=var,
        se_bias=math.sqrt(var / nrep) if nrep > 1 else math.nan,
        se_variance=var * math.sqrt(2.0 / (nrep - 1)) if nrep > 2 else math.nan,
        truth=truth,
        replicates=nrep,
    )


def _theorem3_h_for_degree(config, degree, x0):
    return optimal_bandwidth_direct(
        config.model, x0, degree, config.n, NoiseSpec(config.noise_sd_log),
        config.kernel, config.density(),
    )


def mc_mse(config: ScenarioConfig, x0: float, degree: int, bandwidth: float,
           threads: int = 1) -> float:
    """Empirical mean squared error of the constrained fit at x0."""
    r = mc_bias_variance(config, x0, degree, bandwidth, "de", threads)
    return r.empirical_bias ** 2 + r.empirical_variance * (r.replicates - 1) / r.replicates


# --- scenario JSON ----------------------------------------------------------

def _need(payload, key, kind, path=""):
    loc = f"{path}.{key}" if path else key
    if key not in payload:
        raise ConfigInvalid(f"{loc}: missing")
    val = payload[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigInvalid(f"{loc}: expected a number")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigInvalid(f"{loc}: expected an integer")
        return val
    if not isinstance(val, kind):
        raise ConfigInvalid(f"{loc}: expected {kind.__name__}")
    return val


def _parse_model(payload) -> Optional[QuasiExpModel]:
    if "model" not in payload or payload["model"] is None:
        return None
    m = _need(payload, "model", dict)
    if "lambda" not in m:
        raise ConfigInvalid("model.lambda: missing")
    try:
        return QuasiExpModel(
            _need(m, "alpha", float, "model"),
            float(m["lambda"]),
            float(m.get("g0", 1.0)),
        )
    except ValueError as exc:
        raise ConfigInvalid(f"model: {exc}") from exc


def _parse_design(payload) -> DesignSpec:
    d = _need(payload, "design", dict)
    kind = _need(d, "kind", str, "design")
    if kind == "explicit":
        pts = _need(d, "points", list, "design")
        return DesignSpec("explicit", points=tuple(float(p) for p in pts))
    if kind in ("equispaced", "uniform_random"):
        a = _need(d, "a", float, "design")
        b = _need(d, "b", float, "design")
        if not b > a:
            raise ConfigInvalid("design.b: must exceed design.a")
        return DesignSpec(kind, a=a, b=b)
    raise ConfigInvalid(f"design.kind: unknown kind {kind!r}")


def _parse_bandwidths(payload) -> dict:
    rules = {}
    for name, raw in payload.get("bandwidths", {}).items():
        if name != "default" and name not in METHOD_NAMES:
            raise ConfigInvalid(f"bandwidths.{name}: unknown method")
        if not isinstance(raw, dict):
            raise ConfigInvalid(f"bandwidths.{name}: expected an object")
        mode = raw.get("mode")
        if mode == "fixed":
            rules[name] = BandwidthRule("fixed", h=_need(raw, "h", float, f"bandwidths.{name}"))
        elif mode == "loocv":
            grid = raw.get("grid")
            rules[name] = BandwidthRule(
                "loocv", grid=tuple(float(g) for g in grid) if grid else None
            )
        elif mode == "theorem3":
            rules[name] = BandwidthRule("theorem3")
        else:
            raise ConfigInvalid(f"bandwidths.{name}.mode: unknown mode {mode!r}")
    return rules


def _parse_pseudo_truth(payload, base_dir) -> PseudoTruthSpec:
    pt = payload.get("pseudo_truth", {"mode": "explicit_solution"})
    if not isinstance(pt, dict):
        raise ConfigInvalid("pseudo_truth: expected an object")
    mode = pt.get("mode")
    if mode == "explicit_solution":
        return PseudoTruthSpec("explicit_solution")
    if mode == "local_linear_on_full_data":
        if "data" in pt:
            path = Path(pt["data"])
            if not path.is_absolute():
                path = Path(base_dir) / path
            x, y = dio.read_xy_csv(path)
        elif "x" in pt and "y" in pt:
            x = np.asarray(pt["x"], dtype=float)
            y = np.asarray(pt["y"], dtype=float)
        else:
            raise ConfigInvalid("pseudo_truth.data: path or inline x/y required")
        return PseudoTruthSpec(
            "local_linear_on_full_data",
            data_x=tuple(float(v) for v in x),
            data_y=tuple(float(v) for v in y),
            bandwidth=_need(pt, "bandwidth", float, "pseudo_truth"),
        )
    raise ConfigInvalid(f"pseudo_truth.mode: unknown mode {mode!r}")


def scenario_from_dict(payload: dict, base_dir=".") -> ScenarioConfig:
    """Build and validate a ScenarioConfig from parsed JSON."""
    if not isinstance(payload, dict):
        raise ConfigInvalid("scenario: expected a JSON object")
    kernel_name = payload.get("kernel", "epanechnikov")
    try:
        kernel = KernelSpec.from_name(kernel_name)
    except ValueError as exc:
        raise ConfigInvalid(f"kernel: {exc}") from exc
    methods = payload.get("methods", list(METHOD_NAMES))
    if not isinstance(methods, list):
        raise ConfigInvalid("methods: expected a list")
    removed = payload.get("removed_indices", [])
    if not isinstance(removed, list):
        raise ConfigInvalid("removed_indices: expected a list")
    for idx in removed:
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise ConfigInvalid("removed_indices: expected integers")
    return ScenarioConfig(
        n=_need(payload, "n", int),
        design=_parse_design(payload),
        noise_sd_log=_need(payload, "noise_sd_log", float),
        replicates=_need(payload, "replicates", int),
        master_seed=_need(payload, "master_seed", int),
        model=_parse_model(payload),
        scale=payload.get("scale", "log"),
        removed_indices=tuple(removed),
        kernel=kernel,
        methods=tuple(methods),
        bandwidths=_parse_bandwidths(payload),
        pseudo_truth=_parse_pseudo_truth(payload, base_dir),
        param_estimation=payload.get("param_estimation", "per_replicate"),
        nls_mode=payload.get("nls_mode", "two_step"),
    )


def load_scenario(path) -> tuple[ScenarioConfig, dict]:
    """Load a scenario JSON file; returns (config, raw payload echo)."""
    payload = dio.load_json(path)
    config = scenario_from_dict(payload, base_dir=Path(path).parent)
    return config, payload
