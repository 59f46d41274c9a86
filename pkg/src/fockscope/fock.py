"""Fock-space geometry and observables for spin-1/2 chains.

The computational basis is the set of z-basis product states of an L-site
chain.  Site j (1-based) carries z_j in {-1, +1}; bit (L - j) of the basis
integer stores (z_j + 1)/2, so the bitstring read left to right is site 1
first and the all-down state is integer 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDistributionError,
    InvalidStateError,
    SectorError,
)

NORM_TOL = 1e-10

SECTOR_FULL = "full"
SECTOR_SZ_ZERO = "sz-zero"


@dataclass(frozen=True)
class BasisState:
    """One z-basis product state, stored as (integer index, chain length)."""

    index: int
    length: int

    def __post_init__(self):
        if self.length < 2:
            raise InvalidStateError(f"chain length must be >= 2, got {self.length}")
        if not 0 <= self.index < (1 << self.length):
            raise InvalidStateError(
                f"index {self.index} outside [0, 2^{self.length})"
            )

    @classmethod
    def from_bits(cls, bits: str) -> "BasisState":
        """Build from a bitstring written site 1 first, e.g. '1010'."""
        return cls(int(bits, 2), len(bits))

    @property
    def bits(self) -> str:
        return format(self.index, f"0{self.length}b")

    def z(self, j: int) -> int:
        """Spin z_j in {-1, +1} at 1-based site j."""
        if not 1 <= j <= self.length:
            raise IndexError(f"site {j} outside 1..{self.length}")
        return 1 if (self.index >> (self.length - j)) & 1 else -1

    def complement(self) -> "BasisState":
        return BasisState(self.index ^ ((1 << self.length) - 1), self.length)


def neel_basis_state(L: int) -> BasisState:
    """Alternating product state with site 1 up: |+ - + - ...>."""
    idx = 0
    for j in range(1, L + 1):
        if j % 2 == 1:
            idx |= 1 << (L - j)
    return BasisState(idx, L)


def hamming_distance(a: BasisState, b: BasisState) -> int:
    """Number of sites where the two product states differ."""
    if a.length != b.length:
        raise DimensionMismatchError(
            f"length mismatch: {a.length} vs {b.length}"
        )
    return (a.index ^ b.index).bit_count()


class FockSpace:
    """Full or zero-magnetization slice of the 2^L product-state basis.

    ``states`` lists the member basis integers in increasing order, so a
    sector position doubles as a rank.  All arrays are read-only.
    """

    def __init__(self, L: int, sector: str = SECTOR_FULL):
        if L < 2:
            raise SectorError(f"chain length must be >= 2, got {L}")
        if sector not in (SECTOR_FULL, SECTOR_SZ_ZERO):
            raise SectorError(f"unknown sector {sector!r}")
        if sector == SECTOR_SZ_ZERO and L % 2 != 0:
            raise SectorError(f"sz-zero sector needs even L, got {L}")
        if L > 64:
            raise SectorError("basis integers must fit in 64 bits (L <= 64)")
        self.L = L
        self.sector = sector
        if sector == SECTOR_FULL:
            states = np.arange(1 << L, dtype=np.uint64)
        else:
            all_states = np.arange(1 << L, dtype=np.uint64)
            states = all_states[np.bitwise_count(all_states) == L // 2]
        states.setflags(write=False)
        self.states = states
        self.dim = len(states)

    def position_of(self, index: int) -> int:
        """Rank of a basis integer inside this space."""
        pos = int(np.searchsorted(self.states, np.uint64(index)))
        if pos >= self.dim or int(self.states[pos]) != index:
            raise SectorError(f"basis state {index} not in sector {self.sector}")
        return pos

    def basis_state(self, position: int) -> BasisState:
        return BasisState(int(self.states[position]), self.L)

    def __eq__(self, other):
        return (
            isinstance(other, FockSpace)
            and other.L == self.L
            and other.sector == self.sector
        )

    def __repr__(self):
        return f"FockSpace(L={self.L}, sector={self.sector!r}, dim={self.dim})"


@dataclass
class StateVector:
    """Unit-norm complex amplitudes over a :class:`FockSpace` basis."""

    space: FockSpace
    amplitudes: np.ndarray
    validate: bool = True

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.space.dim,):
            raise InvalidStateError(
                f"amplitude length {amps.shape} does not match dim {self.space.dim}"
            )
        self.amplitudes = amps
        if self.validate:
            n = self.norm()
            if abs(n - 1.0) > NORM_TOL:
                raise InvalidStateError(f"state norm {n!r} deviates from 1")

    @property
    def sector(self) -> str:
        return self.space.sector

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_full(self) -> "StateVector":
        """Embed a sector state into the full 2^L space."""
        if self.space.sector == SECTOR_FULL:
            return self
        full = FockSpace(self.space.L, SECTOR_FULL)
        amps = np.zeros(full.dim, dtype=np.complex128)
        amps[self.space.states.astype(np.int64)] = self.amplitudes
        return StateVector(full, amps, validate=False)


def basis_vector(space: FockSpace, state: BasisState) -> StateVector:
    """Unit vector sitting on one product state."""
    if state.length != space.L:
        raise DimensionMismatchError(
            f"state length {state.length} does not match space L {space.L}"
        )
    amps = np.zeros(space.dim, dtype=np.complex128)
    amps[space.position_of(state.index)] = 1.0
    return StateVector(space, amps, validate=False)


def neel_state(L: int, sector: str = SECTOR_SZ_ZERO) -> StateVector:
    """Néel product state |+ - + - ...> as a unit vector.

    The state has total S^z = 0, so the sz-zero sector requires even L.
    """
    if L < 2:
        raise SectorError(f"chain length must be >= 2, got {L}")
    if sector == SECTOR_SZ_ZERO and L % 2 != 0:
        raise SectorError(f"Néel state with odd L={L} is not in the sz-zero sector")
    return basis_vector(FockSpace(L, sector), neel_basis_state(L))


def uniform_superposition(L: int, sector: str = SECTOR_FULL) -> StateVector:
    space = FockSpace(L, sector)
    amps = np.full(space.dim, 1.0 / math.sqrt(space.dim), dtype=np.complex128)
    return StateVector(space, amps, validate=False)


def closest_fock_state(psi: StateVector) -> tuple[BasisState, float]:
    """Most probable product state and its probability.

    Exact probability ties are broken toward the smallest basis integer,
    which is the first occurrence because sector members are sorted.
    """
    probs = psi.probabilities()
    total = probs.sum()
    if total < NORM_TOL:
        raise InvalidStateError("cannot anchor a zero state vector")
    pos = int(np.argmax(probs))
    return psi.space.basis_state(pos), float(probs[pos])


@dataclass
class RadialDistribution:
    """Probability of sitting x spin flips away from the anchor state."""

    pi: np.ndarray
    anchor: BasisState
    anchor_probability: float
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        self.pi = pi
        if self.validate:
            if pi.shape != (self.anchor.length + 1,):
                raise InvalidDistributionError(
                    f"need L+1={self.anchor.length + 1} bins, got {pi.shape}"
                )
            if np.any(pi < 0):
                raise InvalidDistributionError("negative probability bin")
            if abs(pi.sum() - 1.0) > NORM_TOL:
                raise InvalidDistributionError(
                    f"distribution sums to {pi.sum()!r}, not 1"
                )

    @property
    def L(self) -> int:
        return self.anchor.length

    def to_csv_rows(self) -> list[str]:
        """Rows 'x,pi' with full round-trip precision."""
        return [f"{x},{p:.17g}" for x, p in enumerate(self.pi)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "L": self.L,
                "anchor_bits": self.anchor.bits,
                "pi": [float(f"{p:.17g}") for p in self.pi],
            }
        )


def radial_distribution(psi: StateVector) -> RadialDistribution:
    """Bin |<Z|psi>|^2 by Hamming distance from the most probable state."""
    anchor, p_anchor = closest_fock_state(psi)
    probs = psi.probabilities()
    dists = np.bitwise_count(
        np.bitwise_xor(psi.space.states, np.uint64(anchor.index))
    ).astype(np.int64)
    L = psi.space.L
    pi = np.bincount(dists, weights=probs, minlength=L + 1)
    return RadialDistribution(pi=pi, anchor=anchor, anchor_probability=p_anchor)


@dataclass(frozen=True)
class DisplacementValue:
    """First and second moments of a radial distribution and their spread."""

    mean_x: float
    second_moment: float
    delta_x2: float


def displacement(dist: RadialDistribution) -> DisplacementValue:
    """Spread delta_x2 = <x^2> - <x>^2 of a radial distribution."""
    pi = dist.pi
    if abs(pi.sum() - 1.0) > NORM_TOL:
        raise InvalidDistributionError(
            f"distribution sums to {pi.sum()!r}, not 1"
        )
    x = np.arange(len(pi), dtype=np.float64)
    mean = float(np.dot(x, pi))
    second = float(np.dot(x * x, pi))
    delta = second - mean * mean
    if delta < 0:
        if delta < -1e-12:
            raise InvalidDistributionError(f"negative variance {delta}")
        delta = 0.0
    return DisplacementValue(mean_x=mean, second_moment=second, delta_x2=delta)


def displacement_of_state(psi: StateVector) -> float:
    """Convenience: delta_x2 of a state in one call."""
    return displacement(radial_distribution(psi)).delta_x2
