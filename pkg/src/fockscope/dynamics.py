"""Time evolution and spectral utilities.

Hamiltonian states are propagated with a Lanczos short-time integrator
(full reorthogonalization, adaptive sub-stepping against a residual-based
local error estimate).  A dense eigendecomposition propagator serves as
the exact cross-check and as the fast path for small sectors.  Circuit
states are advanced period by period.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    CapacityError,
    DimensionMismatchError,
    InvalidParameterError,
    KrylovError,
    WindowError,
)
from .fock import SECTOR_FULL, FockSpace, StateVector
from .models import FloquetCircuit, SparseHamiltonian

DENSE_DIM_CAP = 4096
ED_DIM_CAP = 20000


@dataclass(frozen=True)
class KrylovConfig:
    """Knobs of the Lanczos propagator."""

    subspace_dim: int = 30
    step_dt: float = 1.0
    tolerance: float = 1e-10
    max_restarts: int = 60

    def __post_init__(self):
        if self.subspace_dim < 2:
            raise InvalidParameterError("subspace_dim must be >= 2")
        if self.step_dt <= 0 or self.tolerance <= 0:
            raise InvalidParameterError("step_dt and tolerance must be > 0")


def _lanczos_basis(matvec, v0: np.ndarray, m: int):
    """Orthonormal Krylov basis with tridiagonal coefficients.

    Returns (V, alphas, betas, beta_tail); beta_tail == 0 signals an exact
    invariant subspace (happy breakdown).
    """
    dim = v0.shape[0]
    m = min(m, dim)
    V = np.empty((dim, m), dtype=np.complex128)
    alphas = np.empty(m)
    betas = np.empty(max(m - 1, 0))
    V[:, 0] = v0
    w = matvec(v0)
    alphas[0] = np.real(np.vdot(v0, w))
    w = w - alphas[0] * v0
    k = 1
    beta_tail = 0.0
    breakdown = 1e-12
    while k < m:
        # full reorthogonalization, twice for float safety
        for _ in range(2):
            w = w - V[:, :k] @ (V[:, :k].conj().T @ w)
        beta = np.linalg.norm(w)
        if beta < breakdown:
            return V[:, :k], alphas[:k], betas[: k - 1], 0.0
        betas[k - 1] = beta
        V[:, k] = w / beta
        w = matvec(V[:, k]) - beta * V[:, k - 1]
        alphas[k] = np.real(np.vdot(V[:, k], w))
        w = w - alphas[k] * V[:, k]
        k += 1
    for _ in range(2):
        w = w - V @ (V.conj().T @ w)
    beta_tail = float(np.linalg.norm(w))
    return V, alphas, betas, beta_tail


def _propagate_from_basis(evals, evecs, dt):
    """exp(-i dt T) e1 expressed in the Lanczos basis."""
    return evecs @ (np.exp(-1j * dt * evals) * evecs[0, :].conj())


def krylov_evolve(
    H: SparseHamiltonian,
    psi: StateVector,
    t_grid,
    cfg: KrylovConfig | None = None,
) -> list[StateVector]:
    """Propagate psi to every time in a sorted non-negative grid.

    Each accepted Lanczos step keeps the estimated local error
    beta_tail * dt * |u_last| below cfg.tolerance, halving the step when
    needed; a step landing on a grid time emits a snapshot there.
    """
    cfg = cfg or KrylovConfig()
    if psi.space != H.space:
        raise DimensionMismatchError("state and Hamiltonian live in different spaces")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise InvalidParameterError("t_grid must be a non-empty 1-d array")
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise InvalidParameterError("t_grid must be non-negative and increasing")

    mat = H.matrix.astype(np.complex128)  # one-time cast: faster complex matvec
    matvec = mat.__matmul__
    v = psi.amplitudes.copy()
    t = 0.0
    out: list[StateVector] = []
    for target in t_grid:
        while target - t > 1e-14 * max(1.0, target):
            v, t = _krylov_step(matvec, v, t, target, cfg)
        out.append(StateVector(psi.space, v.copy(), validate=False))
    return out


def _krylov_step(matvec, v, t, target, cfg):
    V, alphas, betas, beta_tail = _lanczos_basis(matvec, v, cfg.subspace_dim)
    evals, evecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
    dt = min(cfg.step_dt, target - t)
    if beta_tail == 0.0:
        # invariant subspace: the subspace propagator is exact
        u = _propagate_from_basis(evals, evecs, target - t)
        return V @ u, target
    shrinks = 0
    while True:
        u = _propagate_from_basis(evals, evecs, dt)
        err = beta_tail * dt * abs(u[-1])
        if err <= cfg.tolerance:
            return V @ u, t + dt
        dt *= 0.5
        shrinks += 1
        if shrinks > cfg.max_restarts:
            raise KrylovError(
                f"step at t={t} still above tolerance after {shrinks} halvings"
            )


def spectral_evolve(
    H: SparseHamiltonian,
    psi: StateVector,
    t_grid,
    dim_cap: int = DENSE_DIM_CAP,
) -> list[StateVector]:
    """Exact evolution at every grid time via one full diagonalization."""
    if psi.space != H.space:
        raise DimensionMismatchError("state and Hamiltonian live in different spaces")
    if H.dimension > dim_cap:
        raise CapacityError(f"dimension {H.dimension} exceeds dense cap {dim_cap}")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    evals, evecs = np.linalg.eigh(H.dense())
    coeff = evecs.conj().T @ psi.amplitudes
    phases = np.exp(-1j * np.outer(evals, t_grid))
    block = evecs @ (phases * coeff[:, None])
    return [
        StateVector(psi.space, np.ascontiguousarray(block[:, i]), validate=False)
        for i in range(len(t_grid))
    ]


def dense_evolve(
    H: SparseHamiltonian,
    psi: StateVector,
    t: float,
    dim_cap: int = DENSE_DIM_CAP,
) -> StateVector:
    """exp(-i H t) psi by full diagonalization; the oracle propagator."""
    return spectral_evolve(H, psi, [float(t)], dim_cap=dim_cap)[0]


def _site_layer_diagonal(circuit: FloquetCircuit) -> np.ndarray:
    """Phase vector of the site layer when every site gate is diagonal."""
    vec = np.ones(1, dtype=np.complex128)
    for i in range(circuit.L):
        vec = np.kron(vec, np.diagonal(circuit.site_gates[i]))
    return vec


def _apply_two_site(amps: np.ndarray, gate: np.ndarray, k: int, L: int) -> np.ndarray:
    """Apply a 4x4 gate on sites (k, k+1), 1-based, site 1 most significant."""
    left = 1 << (k - 1)
    right = 1 << (L - k - 1)
    block = amps.reshape(left, 4, right)
    return np.einsum("ab,ibj->iaj", gate, block).reshape(-1)


def apply_floquet(
    circuit: FloquetCircuit,
    psi: StateVector,
    n_periods: int,
    record_at,
) -> list[StateVector]:
    """Advance a full-space state by repeated circuit periods.

    One period applies the site layer first, then the bond gates in their
    stored order.  Snapshots are returned for every requested period count,
    in increasing order (period 0 is the input state).
    """
    if psi.space.sector != SECTOR_FULL:
        raise DimensionMismatchError("circuit evolution needs a full-space state")
    if psi.space.L != circuit.L:
        raise DimensionMismatchError(
            f"state has L={psi.space.L}, circuit has L={circuit.L}"
        )
    if n_periods < 0:
        raise InvalidParameterError("n_periods must be >= 0")
    record = sorted(set(int(n) for n in record_at))
    if record and (record[0] < 0 or record[-1] > n_periods):
        raise InvalidParameterError("record_at entries must lie in [0, n_periods]")

    site_diag = _site_layer_diagonal(circuit) if circuit.diagonal_site_layer else None
    amps = psi.amplitudes.copy()
    out = []
    if record and record[0] == 0:
        out.append(StateVector(psi.space, amps.copy(), validate=False))
        record = record[1:]
    for period in range(1, n_periods + 1):
        if site_diag is not None:
            amps = amps * site_diag
        else:
            for i in range(circuit.L):
                amps = _apply_two_site_single(amps, circuit.site_gates[i], i + 1, circuit.L)
        for k, gate in zip(circuit.bond_order, circuit.bond_gates):
            amps = _apply_two_site(amps, gate, int(k), circuit.L)
        if record and period == record[0]:
            out.append(StateVector(psi.space, amps.copy(), validate=False))
            record = record[1:]
    return out


def _apply_two_site_single(amps: np.ndarray, gate: np.ndarray, site: int, L: int) -> np.ndarray:
    left = 1 << (site - 1)
    right = 1 << (L - site)
    block = amps.reshape(left, 2, right)
    return np.einsum("ab,ibj->iaj", gate, block).reshape(-1)


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of one realization, sorted ascending."""

    eigenvalues: np.ndarray
    sector: str

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        if np.any(np.diff(ev) < 0):
            raise InvalidParameterError("eigenvalues must be sorted ascending")
        object.__setattr__(self, "eigenvalues", ev)


def full_spectrum(H: SparseHamiltonian, dim_cap: int = ED_DIM_CAP) -> Spectrum:
    """Every eigenvalue of the sector block, by dense diagonalization."""
    if H.dimension > dim_cap:
        raise CapacityError(f"dimension {H.dimension} exceeds ED cap {dim_cap}")
    evals = scipy.linalg.eigvalsh(H.dense())
    return Spectrum(eigenvalues=np.sort(evals), sector=H.space.sector)


def heisenberg_time(spectrum: Spectrum, center_fraction: float = 0.1) -> float:
    """2 pi over the mean adjacent gap in the central part of the spectrum."""
    if not 0 < center_fraction <= 1:
        raise InvalidParameterError("center_fraction must be in (0, 1]")
    ev = spectrum.eigenvalues
    n = len(ev)
    m = max(2, int(round(center_fraction * n)))
    m = min(m, n)
    if m < 2:
        raise WindowError("need at least 2 levels in the central window")
    start = (n - m) // 2
    window = ev[start : start + m]
    gap = float(np.diff(window).mean())
    if gap <= 0:
        raise WindowError("central window is degenerate; mean gap is zero")
    return 2.0 * np.pi / gap


@dataclass(frozen=True)
class HeisenbergFit:
    """Parameters (a, b, c) of t_H(W) = 2^L/(L W) * a / sqrt(b + c / W^2).

    The triple is only identified up to (a, b, c) -> (s a, s^2 b, s^2 c);
    fits are reported in the gauge b + c = 1.  The gauge-invariant content
    is (b/a^2, c/a^2), see :meth:`invariants`.
    """

    a: float
    b: float
    c: float
    L: int
    max_rel_residual: float = float("nan")

    def predict(self, W) -> np.ndarray:
        W = np.asarray(W, dtype=np.float64)
        return (2.0**self.L / (self.L * W)) * self.a / np.sqrt(self.b + self.c / W**2)

    def invariants(self) -> tuple[float, float]:
        """(b/a^2, c/a^2): the combination the data actually determines."""
        return self.b / self.a**2, self.c / self.a**2

    def rescaled(self, scale: float) -> "HeisenbergFit":
        """Equivalent triple in another gauge; predictions are unchanged."""
        return HeisenbergFit(
            a=self.a * scale,
            b=self.b * scale**2,
            c=self.c * scale**2,
            L=self.L,
            max_rel_residual=self.max_rel_residual,
        )


def fit_heisenberg_time(samples, L: int) -> HeisenbergFit:
    """Least-squares fit of the Heisenberg-time formula to (W, t_H) pairs.

    The model is linear in (b/a^2, c/a^2) after the substitution
    u = (2^L / (L W t_H))^2 = b/a^2 + (c/a^2)/W^2, which seeds a
    relative-error refinement on t_H itself.
    """
    from scipy.optimize import least_squares

    from .errors import FitError

    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 4:
        raise FitError("need at least 4 (W, t_H) samples")
    W, tH = arr[:, 0], arr[:, 1]
    if np.any(W <= 0) or np.any(tH <= 0):
        raise FitError("W and t_H samples must be positive")

    y = tH * L * W / 2.0**L
    u = 1.0 / y**2
    x = 1.0 / W**2
    design = np.column_stack([np.ones_like(x), x])
    (B0, C0), *_ = np.linalg.lstsq(design, u, rcond=None)

    def residual(p):
        shape = p[0] + p[1] * x
        bad = shape <= 0
        shape = np.where(bad, 1e-300, shape)
        model = 1.0 / np.sqrt(shape)
        r = model / y - 1.0
        return np.where(bad, 1e6, r)

    sol = least_squares(residual, x0=[B0, C0], method="lm")
    if not sol.success:
        raise FitError(f"Heisenberg-time fit did not converge: {sol.message}")
    B, C = sol.x
    if B <= 0 or np.any(B + C * x <= 0):
        raise FitError("fitted model is non-positive over the sampled W range")
    a = 1.0 / np.sqrt(B + C)
    fit = HeisenbergFit(
        a=a,
        b=B * a**2,
        c=C * a**2,
        L=L,
        max_rel_residual=float(np.max(np.abs(residual(sol.x)))),
    )
    return fit


def save_checkpoint(path, state: StateVector, t: float, manifest: dict) -> None:
    """Binary snapshot (basis tag, time, amplitudes, manifest) for resumption."""
    np.savez_compressed(
        path,
        amplitudes=state.amplitudes,
        t=np.float64(t),
        L=np.int64(state.space.L),
        sector=np.str_(state.space.sector),
        manifest=np.str_(json.dumps(manifest, sort_keys=True)),
    )


def load_checkpoint(path) -> tuple[StateVector, float, dict]:
    data = np.load(path, allow_pickle=False)
    space = FockSpace(int(data["L"]), str(data["sector"]))
    state = StateVector(space, data["amplitudes"], validate=False)
    return state, float(data["t"]), json.loads(str(data["manifest"]))
