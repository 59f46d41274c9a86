"""Shared oracle helpers, written independently of the package internals.

Everything here builds operators by explicit Kronecker products and scans
basis states with plain Python loops, so package results can be checked
against a second, structurally different computation.

Basis convention (must match the package): site 1 is the leftmost kron
factor / most significant bit, and amplitude index 0 is the all-down
state, so the single-site spin-z operator is diag(-1, +1)/2.
"""

import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ_DOWN_FIRST = np.array([[-1, 0], [0, 1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def op_on_sites(ops_by_site: dict, L: int) -> np.ndarray:
    """Kron product with identity everywhere except the listed 1-based sites."""
    out = np.ones((1, 1), dtype=complex)
    for j in range(1, L + 1):
        out = np.kron(out, ops_by_site.get(j, ID2))
    return out


def dense_chain_hamiltonian(L, fields, J=1.0, xy_ranges=(1, 2), include_zz=True):
    """Spin-1/2 chain H on the full 2^L space, built term by term."""
    dim = 2**L
    H = np.zeros((dim, dim), dtype=complex)
    for r in xy_ranges:
        for j in range(1, L - r + 1):
            H += 0.25 * J * op_on_sites({j: SX, j + r: SX}, L)
            H += 0.25 * J * op_on_sites({j: SY, j + r: SY}, L)
    if include_zz:
        for j in range(1, L):
            H += 0.25 * J * op_on_sites({j: SZ_DOWN_FIRST, j + 1: SZ_DOWN_FIRST}, L)
    for j in range(1, L + 1):
        H += 0.5 * fields[j - 1] * op_on_sites({j: SZ_DOWN_FIRST}, L)
    return H


def sz_zero_mask(L: int) -> np.ndarray:
    """Boolean mask of full-space indices with exactly L/2 set bits."""
    return np.array([bin(n).count("1") == L // 2 for n in range(2**L)])


def project_to_sector(H_full: np.ndarray, L: int) -> np.ndarray:
    mask = sz_zero_mask(L)
    return H_full[np.ix_(mask, mask)]


def brute_force_radial(amplitudes, basis_integers, L):
    """Double-loop radial distribution; ties to the smallest basis integer."""
    probs = [abs(a) ** 2 for a in amplitudes]
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    anchor = int(basis_integers[best])
    pi = [0.0] * (L + 1)
    for i, n in enumerate(basis_integers):
        x = bin(int(n) ^ anchor).count("1")
        pi[x] += probs[i]
    return np.array(pi), anchor


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
