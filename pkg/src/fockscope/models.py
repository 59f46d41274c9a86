"""Disorder-realization builders: spin-chain Hamiltonians and random circuits.

Three Hamiltonian kinds share the on-site field h_j = W cos(2 pi k j + phi_j)
with k = (sqrt(5)-1)/2 and 1-based site index j:

* ``quasiperiodic``     - one global phase offset, XY (range 1 and 2) + ZZ.
* ``random``            - independent uniform phases per site, same couplings.
* ``noninteracting-qp`` - nearest-neighbour XY hopping only, global phase.

The fourth kind, ``floquet``, is a periodically applied random circuit: a
layer of random single-site phase gates followed by one 4x4 gate per bond,
the bonds visited in a random order fixed per realization.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, InvalidParameterError, ModelKindError
from .fock import SECTOR_SZ_ZERO, FockSpace

WAVE_NUMBER = (math.sqrt(5.0) - 1.0) / 2.0

KIND_QUASIPERIODIC = "quasiperiodic"
KIND_RANDOM = "random"
KIND_NONINTERACTING = "noninteracting-qp"
KIND_FLOQUET = "floquet"

HAMILTONIAN_KINDS = (KIND_QUASIPERIODIC, KIND_RANDOM)
FIELD_KINDS = (KIND_QUASIPERIODIC, KIND_RANDOM, KIND_NONINTERACTING)
ALL_KINDS = FIELD_KINDS + (KIND_FLOQUET,)

DEFAULT_DIM_CAP = 1 << 21


@dataclass(frozen=True)
class ModelSpec:
    """Which model to realize, at which size and disorder strength."""

    kind: str
    L: int
    W: float
    J: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ModelKindError(f"unknown model kind {self.kind!r}")
        if self.L < 2:
            raise InvalidParameterError(f"L must be >= 2, got {self.L}")
        if self.W < 0:
            raise InvalidParameterError(f"W must be >= 0, got {self.W}")

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=seed)


def make_rng(seed) -> np.random.Generator:
    """Fresh generator; accepts ints, SeedSequences, or None."""
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class FieldRealization:
    """Sampled phase offsets and the resulting on-site fields."""

    phases: np.ndarray
    fields: np.ndarray


def sample_fields(spec: ModelSpec, rng: np.random.Generator) -> FieldRealization:
    """Draw phase offsets and evaluate h_j = W cos(2 pi k j + phi_j)."""
    if spec.kind not in FIELD_KINDS:
        raise ModelKindError(
            f"sample_fields handles {FIELD_KINDS}, not {spec.kind!r}"
        )
    if spec.kind == KIND_RANDOM:
        phases = rng.uniform(0.0, 2.0 * math.pi, size=spec.L)
    else:
        phases = np.full(spec.L, rng.uniform(0.0, 2.0 * math.pi))
    j = np.arange(1, spec.L + 1, dtype=np.float64)
    fields = spec.W * np.cos(2.0 * math.pi * WAVE_NUMBER * j + phases)
    return FieldRealization(phases=phases, fields=fields)


@dataclass
class SparseHamiltonian:
    """Sector-restricted sparse Hamiltonian with its basis bookkeeping."""

    matrix: sp.csr_matrix
    space: FockSpace
    spec: ModelSpec

    @property
    def dimension(self) -> int:
        return self.space.dim

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def to_coo(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row, col, value) triplets of the stored nonzeros."""
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_defect(self) -> float:
        d = self.matrix - self.matrix.getH()
        return float(np.max(np.abs(d.toarray()))) if d.nnz else 0.0


def _site_spins(states: np.ndarray, L: int) -> np.ndarray:
    """(dim, L) array of z_j in {-1, +1}; column j-1 is site j."""
    shifts = np.arange(L - 1, -1, -1, dtype=np.uint64)
    bits = (states[:, None] >> shifts[None, :]) & np.uint64(1)
    return 2.0 * bits.astype(np.float64) - 1.0


def _flip_flop_entries(states: np.ndarray, L: int, r: int):
    """Row/column sector positions coupled by an XY term at distance r."""
    rows_all = []
    cols_all = []
    for jsite in range(1, L - r + 1):
        p1 = np.uint64(L - jsite)
        p2 = np.uint64(L - jsite - r)
        differ = ((states >> p1) ^ (states >> p2)) & np.uint64(1) == 1
        src = states[differ]
        dst = src ^ np.uint64((1 << int(p1)) | (1 << int(p2)))
        rows_all.append(np.flatnonzero(differ))
        cols_all.append(np.searchsorted(states, dst))
    return np.concatenate(rows_all), np.concatenate(cols_all)


def _build_chain(
    spec: ModelSpec,
    fields: FieldRealization,
    xy_ranges: tuple[int, ...],
    include_zz: bool,
    sector: str,
    dim_cap: int,
) -> SparseHamiltonian:
    space = FockSpace(spec.L, sector)
    if space.dim > dim_cap:
        raise CapacityError(
            f"sector dimension {space.dim} exceeds cap {dim_cap}"
        )
    states = space.states
    L, J = spec.L, spec.J

    z = _site_spins(states, L)
    diag = 0.5 * (z @ fields.fields)
    if include_zz:
        diag = diag + 0.25 * J * np.sum(z[:, :-1] * z[:, 1:], axis=1)

    rows = [np.arange(space.dim)]
    cols = [np.arange(space.dim)]
    vals = [diag]
    for r in xy_ranges:
        if L - r < 1:
            continue
        rr, cc = _flip_flop_entries(states, L, r)
        rows.append(rr)
        cols.append(cc)
        vals.append(np.full(len(rr), 0.5 * J))
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.dim, space.dim),
    ).tocsr()
    return SparseHamiltonian(matrix=matrix, space=space, spec=spec)


def build_hamiltonian(
    spec: ModelSpec,
    fields: FieldRealization,
    sector: str = SECTOR_SZ_ZERO,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> SparseHamiltonian:
    """Interacting chain: XY hopping at ranges 1 and 2, nearest ZZ, fields.

    Spin operators are sigma/2, so each flip-flop element is J/2 and the
    ZZ bond energy is J z_j z_{j+1} / 4.  Open boundary conditions.
    """
    if spec.kind not in HAMILTONIAN_KINDS:
        raise ModelKindError(
            f"build_hamiltonian handles {HAMILTONIAN_KINDS}, not {spec.kind!r}"
        )
    return _build_chain(spec, fields, (1, 2), True, sector, dim_cap)


def build_noninteracting(
    spec: ModelSpec,
    fields: FieldRealization,
    sector: str = SECTOR_SZ_ZERO,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> SparseHamiltonian:
    """Reference chain without interactions: range-1 XY plus fields only."""
    if spec.kind != KIND_NONINTERACTING:
        raise ModelKindError(
            f"build_noninteracting handles {KIND_NONINTERACTING!r}, not {spec.kind!r}"
        )
    return _build_chain(spec, fields, (1,), False, sector, dim_cap)


def standard_complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """i.i.d. complex normals with unit variance per entry."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def sample_cue(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary via phase-fixed QR."""
    a = standard_complex_normal(rng, (n, n))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def sample_gue(n: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian n x n matrix M = (A + A^dagger)/2, A standard complex normal."""
    a = standard_complex_normal(rng, (n, n))
    return (a + a.conj().T) / 2.0


@dataclass
class FloquetCircuit:
    """One period of the random circuit: site layer then bond layer.

    ``site_gates[i]`` is the 2x2 gate on site i+1; in the default
    eigenphase mode they are diagonal.  ``bond_gates[m]`` acts on sites
    (bond_order[m], bond_order[m] + 1) and the gates are applied in list
    order after the site layer.
    """

    L: int
    W: float
    site_gates: np.ndarray
    bond_gates: list[np.ndarray]
    bond_order: np.ndarray
    single_qubit_mode: str = "eigenphase"
    seed: int | None = None

    @property
    def diagonal_site_layer(self) -> bool:
        off = np.abs(self.site_gates[:, 0, 1]) + np.abs(self.site_gates[:, 1, 0])
        return bool(np.all(off == 0.0))


def sample_floquet_circuit(
    spec: ModelSpec,
    rng: np.random.Generator,
    single_qubit_mode: str = "eigenphase",
) -> FloquetCircuit:
    """Draw one circuit realization.

    Site gates: eigenvalues of a Haar-random 2x2 unitary kept as a diagonal
    phase gate (mode "eigenphase"), or the full unitary (mode "haar").
    Bond gates: exp(i M / W) with M a 4x4 Hermitian Gaussian matrix; the
    bond visiting order is one uniform permutation per realization.
    """
    if spec.kind != KIND_FLOQUET:
        raise ModelKindError(
            f"sample_floquet_circuit handles {KIND_FLOQUET!r}, not {spec.kind!r}"
        )
    if spec.W <= 0:
        raise InvalidParameterError("floquet coupling scale requires W > 0")
    if single_qubit_mode not in ("eigenphase", "haar"):
        raise InvalidParameterError(f"unknown single_qubit_mode {single_qubit_mode!r}")

    site_gates = np.zeros((spec.L, 2, 2), dtype=np.complex128)
    for i in range(spec.L):
        u = sample_cue(2, rng)
        if single_qubit_mode == "eigenphase":
            site_gates[i] = np.diag(np.linalg.eigvals(u))
        else:
            site_gates[i] = u

    bond_order = rng.permutation(spec.L - 1) + 1
    bond_gates = []
    for _ in range(spec.L - 1):
        m = sample_gue(4, rng)
        lam, vec = np.linalg.eigh(m)
        gate = (vec * np.exp(1j * lam / spec.W)) @ vec.conj().T
        bond_gates.append(gate)
    return FloquetCircuit(
        L=spec.L,
        W=spec.W,
        site_gates=site_gates,
        bond_gates=bond_gates,
        bond_order=bond_order,
        single_qubit_mode=single_qubit_mode,
        seed=spec.seed,
    )


def _gate_hash(gate: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(gate).tobytes()).hexdigest()[:16]


def realization_manifest(spec: ModelSpec, realization) -> dict:
    """JSON-ready record that pins down one sampled realization."""
    out = {
        "kind": spec.kind,
        "L": spec.L,
        "W": spec.W,
        "J": spec.J,
        "seed": spec.seed,
    }
    if isinstance(realization, FieldRealization):
        out["phases"] = [float(f"{p:.17g}") for p in realization.phases]
    elif isinstance(realization, FloquetCircuit):
        out["bond_order"] = [int(k) for k in realization.bond_order]
        out["site_gate_hashes"] = [_gate_hash(g) for g in realization.site_gates]
        out["bond_gate_hashes"] = [_gate_hash(g) for g in realization.bond_gates]
        out["single_qubit_mode"] = realization.single_qubit_mode
    else:
        raise TypeError(f"unsupported realization type {type(realization)!r}")
    return out


def realization_json(spec: ModelSpec, realization) -> str:
    return json.dumps(realization_manifest(spec, realization), sort_keys=True)


def sample_realization(spec: ModelSpec, rng: np.random.Generator):
    """Dispatch to the sampler matching the model kind."""
    if spec.kind == KIND_FLOQUET:
        return sample_floquet_circuit(spec, rng)
    return sample_fields(spec, rng)
