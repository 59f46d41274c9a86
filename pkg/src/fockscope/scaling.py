"""Finite-size-scaling analysis of disorder-averaged spreading data.

The collapse cost rescales every size's (W, Q) curve into candidate
master-curve coordinates, linearly interpolates each size onto every other
size's abscissae, and averages the absolute residuals.  Querying outside
the reference curve's range contributes nothing: no extrapolation.  Two
ansatz families are provided, an algebraic one,

    Q(L, W) = L^lambda g[(W - W_c) L^(1/nu)],

and an exponential one with a size-drifting pseudo-critical point,

    Q(L, W) = f(L / xi),  xi = exp(b / sqrt(|W - W_star|)),
    W_star(L) = w0 + w1 L.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.stats
from scipy.stats import qmc

from .errors import (
    InvalidParameterError,
    OptimizationError,
    UndefinedCostError,
    WindowError,
)

BKT_SINGULARITY_PAD = 1e-6


@dataclass
class ScalingDataset:
    """Per-size curves: L -> (strictly increasing W array, Q array)."""

    curves: dict
    validate: bool = True

    def __post_init__(self):
        clean = {}
        for L, (w, q) in sorted(self.curves.items()):
            w = np.asarray(w, dtype=np.float64)
            q = np.asarray(q, dtype=np.float64)
            if w.shape != q.shape or w.ndim != 1:
                raise InvalidParameterError(f"curve L={L}: W and Q shapes differ")
            if np.any(np.diff(w) <= 0):
                raise InvalidParameterError(f"curve L={L}: W must be strictly increasing")
            clean[int(L)] = (w, q)
        self.curves = clean
        if self.validate:
            if len(clean) < 2:
                raise InvalidParameterError("need curves for at least 2 sizes")
            for L, (w, _) in clean.items():
                if len(w) < 4:
                    raise InvalidParameterError(f"curve L={L}: need >= 4 points")

    @property
    def sizes(self) -> list[int]:
        return list(self.curves)

    @property
    def n_points(self) -> int:
        return sum(len(w) for w, _ in self.curves.values())

    @classmethod
    def from_window_averages(cls, rows, validate: bool = True) -> "ScalingDataset":
        """Build from (L, W, value) records, e.g. an ensemble's averages."""
        by_size = {}
        for row in rows:
            L, W, value = int(row[0]), float(row[1]), float(row[2])
            by_size.setdefault(L, []).append((W, value))
        curves = {}
        for L, pts in by_size.items():
            pts.sort()
            arr = np.asarray(pts)
            curves[L] = (arr[:, 0], arr[:, 1])
        return cls(curves, validate=validate)


def interpolate_linear(curve: np.ndarray, x0: float) -> float:
    """Piecewise-linear value at x0, or NaN outside the curve's x-range."""
    arr = np.asarray(curve, dtype=np.float64)
    x, y = arr[:, 0], arr[:, 1]
    if np.any(np.diff(x) <= 0):
        raise InvalidParameterError("curve must be sorted by x")
    if x0 < x[0] or x0 > x[-1]:
        return float("nan")
    return float(np.interp(x0, x, y))


@dataclass(frozen=True)
class PowerLawAnsatz:
    """Algebraic collapse parameters (critical point, length and amplitude exponents)."""

    W_c: float
    nu: float
    lam: float

    def __post_init__(self):
        if self.nu <= 0:
            raise InvalidParameterError("nu must be > 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.W_c, self.nu, self.lam])


@dataclass(frozen=True)
class BKTAnsatz:
    """Exponential collapse parameters with drifting crossing point."""

    b: float
    w0: float
    w1: float

    def __post_init__(self):
        if self.b <= 0:
            raise InvalidParameterError("b must be > 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.b, self.w0, self.w1])


def xi_bkt(W, b: float, w_star: float) -> np.ndarray:
    """Correlation length exp(b / sqrt(|W - W_star|))."""
    with np.errstate(over="ignore"):  # diverges at W_star by construction
        return np.exp(b / np.sqrt(np.abs(np.asarray(W, dtype=np.float64) - w_star)))


def _bkt_abscissa(L: int, W: np.ndarray, b: float, w_star: float) -> np.ndarray:
    """L / xi in the overflow-safe form L * exp(-b / sqrt(|W - W_star|))."""
    return L * np.exp(-b / np.sqrt(np.abs(W - w_star)))


def _pairwise_residual_stats(coords: dict) -> tuple[float, int, int]:
    """(sum of |residual|, in-range count, total comparisons) over size pairs.

    ``coords`` maps L -> (x, y) with x NOT necessarily sorted; each size is
    sorted once here, then every other size is interpolated onto it.
    """
    sorted_curves = {}
    for L, (x, y) in coords.items():
        order = np.argsort(x, kind="stable")
        sorted_curves[L] = (x[order], y[order])
    total = 0.0
    n_in = 0
    n_all = 0
    for Li, (xi, yi) in sorted_curves.items():
        lo, hi = xi[0], xi[-1]
        for Lj, (xj, yj) in sorted_curves.items():
            if Li == Lj:
                continue
            inside = (xj >= lo) & (xj <= hi)
            n_all += len(xj)
            if not np.any(inside):
                continue
            pred = np.interp(xj[inside], xi, yi)
            total += float(np.sum(np.abs(yj[inside] - pred)))
            n_in += int(np.sum(inside))
    return total, n_in, n_all


def _sorted_xy(x, y):
    order = np.argsort(x, kind="stable")
    return x[order], y[order]


def cost_power_law(data: ScalingDataset, p: PowerLawAnsatz) -> float:
    """Mean absolute residual of the algebraic collapse.

    For every ordered pair of distinct sizes (reference i, query j), the
    reference curve is rescaled to master coordinates, evaluated at the
    query's rescaled abscissae, scaled back by L_j^lambda, and compared to
    the query's raw values.  Only in-range comparisons enter the mean.
    """
    sorted_curves = {}
    for L, (w, q) in data.curves.items():
        x = (w - p.W_c) * float(L) ** (1.0 / p.nu)
        y = q / float(L) ** p.lam
        sorted_curves[L] = _sorted_xy(x, y)
    total = 0.0
    n_in = 0
    for Li, (xi, yi) in sorted_curves.items():
        lo, hi = xi[0], xi[-1]
        for Lj, (xj, yj) in sorted_curves.items():
            if Li == Lj:
                continue
            inside = (xj >= lo) & (xj <= hi)
            if not np.any(inside):
                continue
            pred = np.interp(xj[inside], xi, yi)
            total += float(Lj) ** p.lam * float(np.sum(np.abs(yj[inside] - pred)))
            n_in += int(np.sum(inside))
    if n_in == 0:
        raise UndefinedCostError("no overlapping points in collapse coordinates")
    return total / n_in


def cost_bkt(data: ScalingDataset, p: BKTAnsatz) -> float:
    """Mean absolute residual of the exponential collapse.

    Points closer than 1e-6 to the per-size crossing point W_star(L) are
    excluded (the rescaled abscissa degenerates to zero there).
    """
    coords = {}
    for L, (w, q) in data.curves.items():
        w_star = p.w0 + p.w1 * L
        keep = np.abs(w - w_star) > BKT_SINGULARITY_PAD
        if not np.any(keep):
            continue
        x = _bkt_abscissa(L, w[keep], p.b, w_star)
        coords[L] = _sorted_xy(x, q[keep])
    if len(coords) < 2:
        raise UndefinedCostError("fewer than two sizes survive the exclusion rule")
    total, n_in, _ = _pairwise_residual_stats(coords)
    if n_in == 0:
        raise UndefinedCostError("no overlapping points in collapse coordinates")
    return total / n_in


def collapsed_coordinates(data: ScalingDataset, params) -> np.ndarray:
    """(x_scaled, Q_scaled, L) rows for plotting the master curve."""
    rows = []
    if isinstance(params, PowerLawAnsatz):
        for L, (w, q) in data.curves.items():
            x = (w - params.W_c) * float(L) ** (1.0 / params.nu)
            y = q / float(L) ** params.lam
            rows.extend((xi, yi, L) for xi, yi in zip(x, y))
    elif isinstance(params, BKTAnsatz):
        for L, (w, q) in data.curves.items():
            w_star = params.w0 + params.w1 * L
            keep = np.abs(w - w_star) > BKT_SINGULARITY_PAD
            x = _bkt_abscissa(L, w[keep], params.b, w_star)
            rows.extend((xi, yi, L) for xi, yi in zip(x, q[keep]))
    else:
        raise InvalidParameterError(f"unsupported ansatz {type(params)!r}")
    return np.asarray(sorted(rows))


ANSATZ_POWER_LAW = "power-law"
ANSATZ_BKT = "bkt"
PARAM_NAMES = {
    ANSATZ_POWER_LAW: ("W_c", "nu", "lam"),
    ANSATZ_BKT: ("b", "w0", "w1"),
}


# finite penalty for undefined regions keeps the simplex arithmetic clean
UNDEFINED_COST = 1e100


def _make_cost(data: ScalingDataset, ansatz_kind: str):
    if ansatz_kind == ANSATZ_POWER_LAW:
        def cost(vec):
            try:
                return cost_power_law(data, PowerLawAnsatz(*vec))
            except (UndefinedCostError, InvalidParameterError):
                return UNDEFINED_COST
    elif ansatz_kind == ANSATZ_BKT:
        def cost(vec):
            try:
                return cost_bkt(data, BKTAnsatz(*vec))
            except (UndefinedCostError, InvalidParameterError):
                return UNDEFINED_COST
    else:
        raise InvalidParameterError(f"unknown ansatz kind {ansatz_kind!r}")
    return cost


@dataclass
class CollapseResult:
    """Best collapse parameters with cost and per-parameter widths."""

    ansatz: str
    params: dict
    R_star: float
    widths: dict
    n_points: int
    excluded_points: int
    settings: dict

    def ansatz_object(self):
        if self.ansatz == ANSATZ_POWER_LAW:
            return PowerLawAnsatz(self.params["W_c"], self.params["nu"], self.params["lam"])
        return BKTAnsatz(self.params["b"], self.params["w0"], self.params["w1"])


def estimate_width(
    cost_fn,
    x_min: np.ndarray,
    param_index: int,
    eta: float = 0.01,
    cost_min: float | None = None,
    max_doublings: int = 8,
) -> float:
    """Error width of one parameter from the curvature of the cost.

    Perturbs the parameter by a relative eta and converts the cost ratio
    into a width via  eta*theta * [2 ln(R_pert / R_min)]^(-1/2).  When the
    perturbed cost does not exceed the minimum (flat direction at this
    resolution), eta is doubled and the result reported as a lower bound.
    """
    x_min = np.asarray(x_min, dtype=np.float64)
    theta = x_min[param_index]
    step_base = theta if theta != 0 else 1.0
    r0 = cost_fn(x_min) if cost_min is None else cost_min
    if not np.isfinite(r0) or r0 <= 0:
        raise InvalidParameterError("minimum cost must be finite and positive")
    eta_k = eta
    for _ in range(max_doublings + 1):
        x = x_min.copy()
        x[param_index] = theta + eta_k * step_base
        r1 = cost_fn(x)
        if r1 > r0:
            width = abs(eta_k * step_base) * (2.0 * math.log(r1 / r0)) ** -0.5
            if eta_k != eta:
                warnings.warn(
                    f"flat minimum along parameter {param_index}: width is a "
                    f"lower bound obtained at eta={eta_k:g}"
                )
            return width
        eta_k *= 2.0
    warnings.warn(
        f"cost never rose along parameter {param_index} up to eta={eta_k / 2:g}"
    )
    return float("inf")


def optimize_collapse(
    data: ScalingDataset,
    ansatz_kind: str,
    search_box,
    restarts: int = 32,
    seed: int = 7,
    eta: float = 0.01,
    fatol: float = 1e-8,
    max_iter: int = 4000,
) -> CollapseResult:
    """Multi-start simplex minimization of the collapse cost.

    Starting points are a Latin-hypercube sample of the search box; each
    start runs a bounded Nelder-Mead simplex.  The reported minimum is the
    best cost, ties broken toward the earliest restart.
    """
    names = PARAM_NAMES[ansatz_kind]
    box = np.asarray(
        [search_box[n] if isinstance(search_box, dict) else search_box[i]
         for i, n in enumerate(names)],
        dtype=np.float64,
    )
    if box.shape != (3, 2) or np.any(box[:, 0] >= box[:, 1]):
        raise InvalidParameterError("search_box must give (lo, hi) per parameter")
    cost = _make_cost(data, ansatz_kind)

    sampler = qmc.LatinHypercube(d=3, seed=seed)
    unit = sampler.random(restarts)
    starts = box[:, 0] + unit * (box[:, 1] - box[:, 0])

    best = None
    for idx in range(restarts):
        res = scipy.optimize.minimize(
            cost,
            starts[idx],
            method="Nelder-Mead",
            bounds=box,
            options={"fatol": fatol, "xatol": 1e-7, "maxiter": max_iter},
        )
        if not np.isfinite(res.fun) or res.fun >= UNDEFINED_COST * 1e-2:
            continue
        if best is None or res.fun < best[0]:
            best = (float(res.fun), idx, np.asarray(res.x))
    if best is None:
        raise OptimizationError(
            f"no restart produced a finite {ansatz_kind} collapse cost"
        )
    r_star, best_idx, x_best = best

    widths = {
        name: estimate_width(cost, x_best, i, eta=eta, cost_min=r_star)
        for i, name in enumerate(names)
    }
    if ansatz_kind == ANSATZ_POWER_LAW:
        ansatz = PowerLawAnsatz(*x_best)
        _, n_in, n_all = _pairwise_residual_stats(
            {
                L: ((w - ansatz.W_c) * float(L) ** (1 / ansatz.nu), q / float(L) ** ansatz.lam)
                for L, (w, q) in data.curves.items()
            }
        )
    else:
        ansatz = BKTAnsatz(*x_best)
        coords = {}
        for L, (w, q) in data.curves.items():
            w_star = ansatz.w0 + ansatz.w1 * L
            keep = np.abs(w - w_star) > BKT_SINGULARITY_PAD
            if np.any(keep):
                coords[L] = (_bkt_abscissa(L, w[keep], ansatz.b, w_star), q[keep])
        _, n_in, n_all = _pairwise_residual_stats(coords)

    return CollapseResult(
        ansatz=ansatz_kind,
        params={name: float(v) for name, v in zip(names, x_best)},
        R_star=r_star,
        widths=widths,
        n_points=n_in,
        excluded_points=n_all - n_in,
        settings={
            "search_box": {n: [float(lo), float(hi)] for n, (lo, hi) in zip(names, box)},
            "restarts": restarts,
            "seed": seed,
            "eta": eta,
            "fatol": fatol,
            "best_restart": int(best_idx),
        },
    )


@dataclass(frozen=True)
class PowerBetaFit:
    """Size-dependence exponent from a log-log straight-line fit."""

    beta: float
    stderr: float
    ci95: tuple[float, float]
    log_prefactor: float


def fit_power_beta(points) -> PowerBetaFit:
    """Fit Q proportional to L^beta by least squares on log Q vs log L."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InvalidParameterError("need at least 3 (L, value) points")
    if np.any(arr <= 0):
        raise InvalidParameterError("sizes and values must be positive")
    logL, logQ = np.log(arr[:, 0]), np.log(arr[:, 1])
    fit = scipy.stats.linregress(logL, logQ)
    dof = len(arr) - 2
    tcrit = scipy.stats.t.ppf(0.975, dof)
    return PowerBetaFit(
        beta=float(fit.slope),
        stderr=float(fit.stderr),
        ci95=(float(fit.slope - tcrit * fit.stderr), float(fit.slope + tcrit * fit.stderr)),
        log_prefactor=float(fit.intercept),
    )


@dataclass(frozen=True)
class LogGrowthFit:
    """Slope of value = s * ln(t) + c over a window, with R^2 goodness."""

    slope: float
    intercept: float
    goodness: float


def fit_log_growth(trace, window: tuple[float, float]) -> LogGrowthFit:
    """Fit logarithmic growth over a time window of a (t, value) trace."""
    arr = np.asarray(trace, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParameterError("trace must be (t, value) rows")
    t_i, t_f = window
    sel = (arr[:, 0] >= t_i) & (arr[:, 0] <= t_f)
    if int(np.sum(sel)) < 3:
        raise WindowError(f"fewer than 3 trace points in window [{t_i}, {t_f}]")
    t, y = arr[sel, 0], arr[sel, 1]
    if np.any(t <= 0):
        raise InvalidParameterError("log fit needs t > 0 inside the window")
    x = np.log(t)
    fit = scipy.stats.linregress(x, y)
    resid = y - (fit.slope * x + fit.intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    goodness = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LogGrowthFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        goodness=goodness,
    )
