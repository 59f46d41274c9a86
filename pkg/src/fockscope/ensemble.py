"""Disorder-ensemble orchestration and trace aggregation.

A run sweeps system sizes and disorder strengths, evolves one Néel quench
per realization, and records the Fock-space spread delta_x2 on a fixed
time grid.  Seeds are derived counter-style from a master seed, so adding
disorder points or re-running never reshuffles existing streams.
"""

from __future__ import annotations

import logging
import time as _time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    KrylovConfig,
    apply_floquet,
    full_spectrum,
    heisenberg_time,
    fit_heisenberg_time,
    krylov_evolve,
    spectral_evolve,
)
from .errors import InvalidParameterError, WindowError
from .fock import SECTOR_FULL, SECTOR_SZ_ZERO, displacement_of_state, neel_state
from .models import (
    KIND_FLOQUET,
    KIND_NONINTERACTING,
    ModelSpec,
    build_hamiltonian,
    build_noninteracting,
    make_rng,
    sample_fields,
    sample_floquet_circuit,
)

logger = logging.getLogger("fockscope.ensemble")

DENSE_EVOLVER_CAP = 4096
SPECTRA_STREAM_OFFSET = 1 << 20  # realization indices must stay below this


def derive_seed(master_seed: int, L: int, w_index: int, realization_index: int) -> int:
    """64-bit child seed from (master, L, W index, realization index)."""
    ss = np.random.SeedSequence(
        master_seed, spawn_key=(L, w_index, realization_index)
    )
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TimeSpec:
    """How to build the recording grid and the averaging window.

    rule "fixed"      - window [t_i, t_f], same for every (L, W).
    rule "heisenberg" - window [t_H, t_H + pad]; t_H comes from the
                        fitted spectral formula, measured per L over the
                        disorder grid with n_spectra realizations.
    rule "periods"    - integer-period grid for circuits; window defaults
                        to [1e4, 2e4] up to L = 16 and [3e4, 4e4] above.
    rule "explicit"   - caller supplies times and window directly.
    """

    rule: str = "fixed"
    t_min: float = 0.1
    log_points: int = 24
    window_points: int = 26
    t_i: float | None = None
    t_f: float | None = None
    pad: float = 100.0
    center_fraction: float = 0.1
    n_spectra: int = 4
    n_i: int | None = None
    n_f: int | None = None
    times: tuple | None = None
    window: tuple | None = None

    def __post_init__(self):
        if self.rule not in ("fixed", "heisenberg", "periods", "explicit"):
            raise InvalidParameterError(f"unknown time rule {self.rule!r}")
        if self.rule == "fixed" and (self.t_i is None or self.t_f is None):
            raise InvalidParameterError("fixed rule needs t_i and t_f")
        if self.rule == "explicit" and (self.times is None or self.window is None):
            raise InvalidParameterError("explicit rule needs times and window")


def floquet_window(L: int) -> tuple[int, int]:
    """Default period window for circuit runs."""
    return (10_000, 20_000) if L <= 16 else (30_000, 40_000)


@dataclass(frozen=True)
class ResolvedTimes:
    times: np.ndarray
    window: tuple[float, float]
    kind: str  # "continuous" | "periods"


def _composite_grid(t_min, t_i, t_f, log_points, window_points) -> np.ndarray:
    head = np.geomspace(t_min, t_i, log_points, endpoint=False)
    tail = np.linspace(t_i, t_f, window_points)
    return np.concatenate([[0.0], head, tail])


def _period_grid(n_i, n_f, log_points, window_points) -> np.ndarray:
    head = np.unique(np.geomspace(1, max(n_i, 2), log_points).astype(np.int64))
    head = head[head < n_i]
    tail = np.unique(np.linspace(n_i, n_f, window_points).astype(np.int64))
    return np.concatenate([[0], head, tail])


def resolve_times(ts: TimeSpec, L: int, t_H: float | None = None) -> ResolvedTimes:
    """Concrete grid + window for one (L, W) point."""
    if ts.rule == "explicit":
        return ResolvedTimes(
            np.asarray(ts.times, dtype=np.float64), tuple(ts.window), "continuous"
        )
    if ts.rule == "fixed":
        return ResolvedTimes(
            _composite_grid(ts.t_min, ts.t_i, ts.t_f, ts.log_points, ts.window_points),
            (ts.t_i, ts.t_f),
            "continuous",
        )
    if ts.rule == "heisenberg":
        if t_H is None:
            raise InvalidParameterError("heisenberg rule needs a t_H estimate")
        return ResolvedTimes(
            _composite_grid(ts.t_min, t_H, t_H + ts.pad, ts.log_points, ts.window_points),
            (t_H, t_H + ts.pad),
            "continuous",
        )
    n_i, n_f = (ts.n_i, ts.n_f) if ts.n_i is not None else floquet_window(L)
    return ResolvedTimes(
        _period_grid(n_i, n_f, ts.log_points, ts.window_points),
        (float(n_i), float(n_f)),
        "periods",
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one ensemble sweep bit-for-bit."""

    kind: str
    L_list: tuple[int, ...]
    W_grid: tuple[float, ...]
    n_realizations: int
    time_spec: TimeSpec
    master_seed: int
    J: float = 1.0
    sector: str = SECTOR_SZ_ZERO
    evolver: str = "krylov"  # "krylov" | "dense"
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    floquet_site_mode: str = "eigenphase"
    workers: int = 1
    min_completion: float = 0.95
    output_dir: str | None = None

    def __post_init__(self):
        if self.n_realizations < 1:
            raise InvalidParameterError("n_realizations must be >= 1")
        w = np.asarray(self.W_grid, dtype=np.float64)
        if len(w) == 0 or np.any(np.diff(w) <= 0):
            raise InvalidParameterError("W_grid must be non-empty, strictly increasing")
        if self.evolver not in ("krylov", "dense"):
            raise InvalidParameterError(f"unknown evolver {self.evolver!r}")

    def model_spec(self, L: int, W: float) -> ModelSpec:
        return ModelSpec(kind=self.kind, L=L, W=float(W), J=self.J)

    def to_manifest(self) -> dict:
        ts = self.time_spec
        return {
            "kind": self.kind,
            "L_list": list(self.L_list),
            "W_grid": [float(f"{w:.17g}") for w in self.W_grid],
            "n_realizations": self.n_realizations,
            "master_seed": self.master_seed,
            "J": self.J,
            "sector": self.sector,
            "evolver": self.evolver,
            "krylov": {
                "subspace_dim": self.krylov.subspace_dim,
                "step_dt": self.krylov.step_dt,
                "tolerance": self.krylov.tolerance,
                "max_restarts": self.krylov.max_restarts,
            },
            "floquet_site_mode": self.floquet_site_mode,
            "min_completion": self.min_completion,
            "time_spec": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in vars(ts).items()
                if v is not None
            },
        }


def run_realization(
    spec: ModelSpec,
    seed: int,
    times,
    sector: str = SECTOR_SZ_ZERO,
    evolver: str = "krylov",
    krylov_cfg: KrylovConfig | None = None,
    floquet_site_mode: str = "eigenphase",
) -> np.ndarray:
    """delta_x2 of one quench realization at every recorded time."""
    rng = make_rng(seed)
    if spec.kind == KIND_FLOQUET:
        periods = np.asarray(times, dtype=np.int64)
        circuit = sample_floquet_circuit(spec, rng, floquet_site_mode)
        psi0 = neel_state(spec.L, SECTOR_FULL)
        states = apply_floquet(circuit, psi0, int(periods.max()), periods)
        return np.array([displacement_of_state(s) for s in states])

    fields = sample_fields(spec, rng)
    if spec.kind == KIND_NONINTERACTING:
        H = build_noninteracting(spec, fields, sector)
    else:
        H = build_hamiltonian(spec, fields, sector)
    psi0 = neel_state(spec.L, sector)
    t = np.asarray(times, dtype=np.float64)
    positive = t[t > 0]
    if evolver == "dense":
        states = spectral_evolve(H, psi0, positive, dim_cap=DENSE_EVOLVER_CAP)
    else:
        states = krylov_evolve(H, psi0, positive, krylov_cfg)
    vals = np.empty(len(t))
    vals[t <= 0] = 0.0  # Néel is a product state: zero spread at t = 0
    vals[t > 0] = [displacement_of_state(s) for s in states]
    return vals


@dataclass
class AggregateSeries:
    """Disorder-averaged trace with its scatter across realizations."""

    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    count: int
    time_kind: str = "continuous"

    def __post_init__(self):
        if not (len(self.times) == len(self.mean) == len(self.std)):
            raise InvalidParameterError("times/mean/std lengths differ")


def aggregate_traces(times, traces, time_kind="continuous") -> AggregateSeries:
    """Stack per-realization traces (in realization order) into a series."""
    block = np.asarray(traces, dtype=np.float64)
    if block.ndim != 2 or block.shape[1] != len(times):
        raise InvalidParameterError("traces must be (n_realizations, n_times)")
    return AggregateSeries(
        times=np.asarray(times, dtype=np.float64),
        mean=block.mean(axis=0),
        std=block.std(axis=0),  # population spread; zero for a single trace
        count=block.shape[0],
        time_kind=time_kind,
    )


def merge_series(a: AggregateSeries, b: AggregateSeries) -> AggregateSeries:
    """Count-weighted merge of two partial aggregates over the same grid."""
    if len(a.times) != len(b.times) or np.any(a.times != b.times):
        raise InvalidParameterError("cannot merge series on different grids")
    n = a.count + b.count
    mean = (a.count * a.mean + b.count * b.mean) / n
    delta = b.mean - a.mean
    m2 = (
        a.count * a.std**2
        + b.count * b.std**2
        + delta**2 * a.count * b.count / n
    )
    return AggregateSeries(
        times=a.times,
        mean=mean,
        std=np.sqrt(m2 / n),
        count=n,
        time_kind=a.time_kind,
    )


@dataclass(frozen=True)
class WindowAverage:
    """Time-averaged value of a series over one window."""

    L: int
    W: float
    window: tuple[float, float]
    value: float
    stderr: float
    count: int


def window_average(
    series: AggregateSeries,
    window: tuple[float, float],
    L: int = 0,
    W: float = 0.0,
) -> WindowAverage:
    """Trapezoidal time average of the mean trace over [t_i, t_f].

    Period series are averaged as a plain mean over the recorded periods
    inside the window.  The stderr propagates the per-time standard errors
    assuming full correlation across times (conservative).
    """
    t_i, t_f = float(window[0]), float(window[1])
    if t_f <= t_i:
        raise WindowError(f"empty window [{t_i}, {t_f}]")
    t, y, s = series.times, series.mean, series.std
    if t_i < t[0] or t_f > t[-1]:
        raise WindowError(
            f"window [{t_i}, {t_f}] outside recorded range [{t[0]}, {t[-1]}]"
        )
    if series.time_kind == "periods":
        mask = (t >= t_i) & (t <= t_f)
        if not np.any(mask):
            raise WindowError("no recorded periods inside the window")
        value = float(y[mask].mean())
        stderr = float(s[mask].mean()) / np.sqrt(series.count)
        return WindowAverage(L, W, (t_i, t_f), value, stderr, series.count)

    inner = (t > t_i) & (t < t_f)
    tt = np.concatenate([[t_i], t[inner], [t_f]])
    yy = np.concatenate([[np.interp(t_i, t, y)], y[inner], [np.interp(t_f, t, y)]])
    ss = np.concatenate([[np.interp(t_i, t, s)], s[inner], [np.interp(t_f, t, s)]])
    value = float(np.trapezoid(yy, tt)) / (t_f - t_i)
    stderr = float(np.trapezoid(ss, tt)) / (t_f - t_i) / np.sqrt(series.count)
    return WindowAverage(L, W, (t_i, t_f), value, stderr, series.count)


def rolling_std(values, times, window_len: float) -> tuple[np.ndarray, np.ndarray]:
    """Population std of trace samples in [t, t + window_len] per start time.

    Start times whose window holds fewer than two samples are omitted.
    """
    if window_len <= 0:
        raise InvalidParameterError("window_len must be > 0")
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    starts, out = [], []
    for i, t0 in enumerate(t):
        j = np.searchsorted(t, t0 + window_len, side="right")
        if j - i >= 2:
            starts.append(t0)
            out.append(v[i:j].std())
    return np.asarray(starts), np.asarray(out)


@dataclass(frozen=True)
class PeakEstimate:
    """Location of the maximum of a sampled curve."""

    w_star: float
    boundary: bool = False
    plateau_interval: tuple[float, float] | None = None
    w_err: float | None = None


def _parabola_vertex(x, y) -> float:
    """Vertex abscissa of the parabola through three points."""
    d21, d23 = x[1] - x[0], x[1] - x[2]
    num = d21**2 * (y[1] - y[2]) - d23**2 * (y[1] - y[0])
    den = d21 * (y[1] - y[2]) - d23 * (y[1] - y[0])
    if den == 0:
        return float(x[1])
    return float(x[1] - 0.5 * num / den)


def peak_location(curve, y_err=None) -> PeakEstimate:
    """Refined maximum of a (W, value) curve.

    Interior maxima are refined by the quadratic through the peak sample
    and its two neighbours; maxima at the ends are flagged as boundary
    hits; exact ties are reported as a plateau interval.  When ``y_err``
    is given, a linearized uncertainty on the vertex is attached.
    """
    arr = np.asarray(curve, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise InvalidParameterError("need at least 3 (W, value) points")
    w, q = arr[:, 0], arr[:, 1]
    if np.any(np.diff(w) <= 0):
        raise InvalidParameterError("W values must be strictly increasing")
    top = np.flatnonzero(q == q.max())
    if len(top) > 1:
        lo, hi = float(w[top[0]]), float(w[top[-1]])
        return PeakEstimate(w_star=0.5 * (lo + hi), plateau_interval=(lo, hi))
    i = int(top[0])
    if i == 0 or i == len(w) - 1:
        return PeakEstimate(w_star=float(w[i]), boundary=True)
    sl = slice(i - 1, i + 2)
    w_star = _parabola_vertex(w[sl], q[sl])
    w_err = None
    if y_err is not None:
        sig = np.asarray(y_err, dtype=np.float64)[sl]
        grads = np.empty(3)
        for k in range(3):
            bump = np.zeros(3)
            h = max(abs(q[sl][k]) * 1e-6, 1e-12)
            bump[k] = h
            grads[k] = (
                _parabola_vertex(w[sl], q[sl] + bump)
                - _parabola_vertex(w[sl], q[sl] - bump)
            ) / (2 * h)
        w_err = float(np.sqrt(np.sum((grads * sig) ** 2)))
    return PeakEstimate(w_star=w_star, w_err=w_err)


@dataclass
class EnsembleResult:
    """Everything a sweep produced, keyed by (L, W)."""

    series: dict
    windows: dict
    window_averages: list
    completion: dict
    heisenberg_fits: dict
    manifest: dict

    @property
    def fully_complete(self) -> bool:
        return all(done == want for done, want in self.completion.values())

    def curve(self, L: int) -> np.ndarray:
        """(W, window-average) rows for one size, sorted by W."""
        rows = [
            (wa.W, wa.value) for wa in self.window_averages if wa.L == L
        ]
        return np.asarray(sorted(rows))


def _build_for_kind(spec: ModelSpec, fields, sector: str):
    if spec.kind == KIND_NONINTERACTING:
        return build_noninteracting(spec, fields, sector)
    return build_hamiltonian(spec, fields, sector)


def measure_heisenberg_times(cfg: RunConfig, L: int) -> np.ndarray:
    """Mean t_H per disorder strength, averaged over a few spectra."""
    if cfg.kind == KIND_FLOQUET:
        raise InvalidParameterError(
            "heisenberg window rule applies to Hamiltonian kinds only"
        )
    ts = cfg.time_spec
    out = np.empty(len(cfg.W_grid))
    for w_idx, W in enumerate(cfg.W_grid):
        vals = []
        for k in range(ts.n_spectra):
            seed = derive_seed(cfg.master_seed, L, w_idx, SPECTRA_STREAM_OFFSET + k)
            spec = cfg.model_spec(L, W).with_seed(seed)
            fields = sample_fields(spec, make_rng(seed))
            H = _build_for_kind(spec, fields, cfg.sector)
            vals.append(heisenberg_time(full_spectrum(H), ts.center_fraction))
        out[w_idx] = np.mean(vals)
    return out


def _realization_task(args):
    spec, seed, times, sector, evolver, krylov_cfg, site_mode = args
    return run_realization(spec, seed, times, sector, evolver, krylov_cfg, site_mode)


def _realization_task_caught(args):
    """Pool-safe wrapper: returns None instead of raising."""
    try:
        return _realization_task(args)
    except Exception as exc:  # logged by the parent
        return ("failed", repr(exc))


def run_ensemble(cfg: RunConfig, resume: bool = False) -> EnsembleResult:
    """Sweep (L, W), aggregate realizations, and optionally persist.

    Deterministic for a fixed config: seeds are derived per realization
    index, and aggregation always happens in realization order.  Failed
    realizations are logged and excluded; their indices are never reused.
    """
    from . import storage

    sector = SECTOR_FULL if cfg.kind == KIND_FLOQUET else cfg.sector
    out_dir = cfg.output_dir
    manifest = {"config": cfg.to_manifest(), "format": "fockscope-results-v1"}
    manifest_hash = None
    if out_dir is not None:
        manifest_hash = storage.write_manifest(out_dir, manifest)

    heisenberg_fits = {}
    if cfg.time_spec.rule == "heisenberg":
        for L in cfg.L_list:
            tH = measure_heisenberg_times(cfg, L)
            fit = fit_heisenberg_time(np.column_stack([cfg.W_grid, tH]), L)
            heisenberg_fits[L] = fit
            logger.info(
                "heisenberg fit L=%d: invariants=%s max_rel_residual=%.3g",
                L, fit.invariants(), fit.max_rel_residual,
            )

    series, windows, averages, completion = {}, {}, [], {}
    for L in cfg.L_list:
        for w_idx, W in enumerate(cfg.W_grid):
            t_H = heisenberg_fits[L].predict(W).item() if L in heisenberg_fits else None
            resolved = resolve_times(cfg.time_spec, L, t_H)
            key = (L, float(W))

            agg = None
            if resume and out_dir is not None:
                agg = storage.try_read_series(out_dir, L, w_idx, manifest_hash)
                if agg is not None and len(agg.times) != len(resolved.times):
                    agg = None
            if agg is None:
                agg = _run_point(cfg, L, w_idx, W, resolved, sector)
                if out_dir is not None:
                    storage.write_series(
                        out_dir, L, w_idx, W, cfg.kind, agg,
                        resolved.window, manifest_hash,
                    )
            series[key] = agg
            windows[key] = resolved.window
            completion[key] = (agg.count, cfg.n_realizations)
            if agg.count >= cfg.min_completion * cfg.n_realizations:
                averages.append(window_average(agg, resolved.window, L=L, W=float(W)))
            else:
                logger.warning(
                    "point L=%d W=%g below completion threshold (%d/%d); "
                    "excluded from window averages",
                    L, W, agg.count, cfg.n_realizations,
                )

    result = EnsembleResult(
        series=series,
        windows=windows,
        window_averages=averages,
        completion=completion,
        heisenberg_fits=heisenberg_fits,
        manifest=manifest,
    )
    if out_dir is not None:
        storage.write_window_averages(out_dir, averages, manifest_hash)
        storage.write_checksums(out_dir, manifest_hash)
    return result


def _run_point(cfg, L, w_idx, W, resolved, sector) -> AggregateSeries:
    tasks = []
    for r_idx in range(cfg.n_realizations):
        seed = derive_seed(cfg.master_seed, L, w_idx, r_idx)
        spec = cfg.model_spec(L, W).with_seed(seed)
        tasks.append(
            (spec, seed, resolved.times, sector, cfg.evolver,
             cfg.krylov, cfg.floquet_site_mode)
        )

    traces = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_realization_task_caught, tasks, chunksize=1))
        for r_idx, trace in enumerate(results):
            if isinstance(trace, tuple) and trace and trace[0] == "failed":
                logger.error(
                    "realization L=%d W=%g idx=%d failed: %s; excluded",
                    L, W, r_idx, trace[1],
                )
                continue
            traces.append(trace)
            logger.info("realization L=%d W=%g idx=%d done", L, W, r_idx)
    else:
        for r_idx, task in enumerate(tasks):
            t0 = _time.perf_counter()
            try:
                traces.append(_realization_task(task))
            except Exception:
                logger.exception(
                    "realization L=%d W=%g seed=%d failed; excluded",
                    L, W, task[1],
                )
                continue
            logger.info(
                "realization L=%d W=%g seed=%d wall=%.2fs",
                L, W, task[1], _time.perf_counter() - t0,
            )
    if not traces:
        warnings.warn(f"every realization failed at L={L}, W={W}")
        n = len(resolved.times)
        return AggregateSeries(
            times=np.asarray(resolved.times, dtype=np.float64),
            mean=np.full(n, np.nan),
            std=np.full(n, np.nan),
            count=0,
            time_kind=resolved.kind,
        )
    return aggregate_traces(resolved.times, traces, resolved.kind)
