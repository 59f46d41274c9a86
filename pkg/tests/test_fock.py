"""Fock-space geometry and observables against brute-force enumeration."""

import itertools
import math

import numpy as np
import pytest

from fockscope import (
    BasisState,
    FockSpace,
    StateVector,
    basis_vector,
    closest_fock_state,
    displacement,
    hamming_distance,
    neel_basis_state,
    neel_state,
    radial_distribution,
    uniform_superposition,
)
from fockscope.errors import (
    DimensionMismatchError,
    InvalidDistributionError,
    InvalidStateError,
    SectorError,
)

from conftest import brute_force_radial, random_state


class TestBasisState:
    def test_bits_round_trip(self):
        s = BasisState.from_bits("1010")
        assert s.index == 10 and s.length == 4
        assert s.bits == "1010"
        assert [s.z(j) for j in (1, 2, 3, 4)] == [1, -1, 1, -1]

    def test_neel_is_site_one_up(self):
        assert neel_basis_state(4).bits == "1010"
        assert neel_basis_state(2).bits == "10"

    def test_out_of_range_index_rejected(self):
        with pytest.raises(InvalidStateError):
            BasisState(16, 4)


class TestHammingDistance:
    def test_identity(self):
        for L in (2, 5, 9):
            s = neel_basis_state(L)
            assert hamming_distance(s, s) == 0

    def test_full_flip(self):
        a = BasisState.from_bits("1111")
        b = BasisState.from_bits("0000")
        assert hamming_distance(a, b) == 4

    def test_neel_complement(self):
        s = neel_basis_state(6)
        assert hamming_distance(s, s.complement()) == 6

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            hamming_distance(BasisState(0, 3), BasisState(0, 4))

    def test_symmetry_and_triangle_exhaustive_L4(self):
        states = [BasisState(n, 4) for n in range(16)]
        for a, b in itertools.product(states, repeat=2):
            assert hamming_distance(a, b) == hamming_distance(b, a)
        for a, b, c in itertools.product(states, repeat=3):
            assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


class TestClosestFockState:
    def test_product_state(self):
        psi = neel_state(4)
        z, p = closest_fock_state(psi)
        assert z.bits == "1010" and p == 1.0

    def test_uniform_tie_breaks_to_lowest_index(self):
        psi = uniform_superposition(2)
        z, p = closest_fock_state(psi)
        assert z.index == 0
        assert p == pytest.approx(0.25, abs=1e-15)

    def test_matches_exhaustive_scan_L3(self, rng):
        space = FockSpace(3, "full")
        for _ in range(50):
            amps = random_state(space.dim, rng)
            psi = StateVector(space, amps, validate=False)
            z, p = closest_fock_state(psi)
            probs = np.abs(amps) ** 2
            assert p == pytest.approx(probs.max(), abs=1e-15)
            assert z.index == int(np.argmax(probs))

    def test_zero_vector_rejected(self):
        space = FockSpace(2, "full")
        psi = StateVector(space, np.zeros(4), validate=False)
        with pytest.raises(InvalidStateError):
            closest_fock_state(psi)


class TestRadialDistribution:
    def test_product_state_is_point_mass(self):
        d = radial_distribution(neel_state(6))
        expect = np.zeros(7)
        expect[0] = 1.0
        np.testing.assert_array_equal(d.pi, expect)

    def test_uniform_superposition_binomial(self):
        d = radial_distribution(uniform_superposition(2))
        np.testing.assert_allclose(d.pi, [0.25, 0.5, 0.25], atol=1e-15)

    @pytest.mark.parametrize("L,sector", [(4, "full"), (6, "full"), (6, "sz-zero")])
    def test_matches_brute_force(self, L, sector, rng):
        space = FockSpace(L, sector)
        for _ in range(100):
            amps = random_state(space.dim, rng)
            psi = StateVector(space, amps, validate=False)
            d = radial_distribution(psi)
            pi_ref, anchor_ref = brute_force_radial(amps, space.states, L)
            assert d.anchor.index == anchor_ref
            np.testing.assert_allclose(d.pi, pi_ref, atol=1e-12)
            assert abs(d.pi.sum() - 1.0) < 1e-10
            assert d.pi[0] == d.anchor_probability

    def test_sector_equals_full_space_for_embedded_state(self, rng):
        sector = FockSpace(6, "sz-zero")
        amps = random_state(sector.dim, rng)
        psi = StateVector(sector, amps, validate=False)
        np.testing.assert_allclose(
            radial_distribution(psi).pi,
            radial_distribution(psi.to_full()).pi,
            atol=1e-14,
        )


class TestDisplacement:
    def test_point_mass_is_exactly_zero(self):
        d = radial_distribution(basis_vector(FockSpace(5, "full"), BasisState(9, 5)))
        assert displacement(d).delta_x2 == 0.0

    @pytest.mark.parametrize("L", [2, 4, 6, 8])
    def test_uniform_superposition_quarter_L(self, L):
        v = displacement(radial_distribution(uniform_superposition(L)))
        assert v.mean_x == pytest.approx(L / 2, abs=1e-12)
        assert v.delta_x2 == pytest.approx(L / 4, abs=1e-12)

    def test_matches_high_precision_arithmetic(self, rng):
        from fractions import Fraction

        from fockscope import RadialDistribution

        L = 5
        raw = rng.random(L + 1)
        pi = raw / raw.sum()
        anchor = BasisState(0, L)
        d = RadialDistribution(pi=pi, anchor=anchor, anchor_probability=pi[0])
        v = displacement(d)
        exact_pi = [Fraction(p) for p in pi]
        mean = sum(x * p for x, p in enumerate(exact_pi))
        second = sum(x * x * p for x, p in enumerate(exact_pi))
        assert v.mean_x == pytest.approx(float(mean), abs=1e-13)
        assert v.delta_x2 == pytest.approx(float(second - mean**2), abs=1e-12)
        assert abs(v.delta_x2 - (v.second_moment - v.mean_x**2)) <= 1e-12
        assert 0 <= v.delta_x2 <= L**2 / 4

    def test_unnormalized_rejected(self):
        from fockscope import RadialDistribution

        bad = RadialDistribution(
            pi=np.array([0.5, 0.2, 0.0]),
            anchor=BasisState(0, 2),
            anchor_probability=0.5,
            validate=False,
        )
        with pytest.raises(InvalidDistributionError):
            displacement(bad)


class TestNeelState:
    def test_L2_site_one_up(self):
        psi = neel_state(2)
        z, p = closest_fock_state(psi)
        assert z.bits == "10" and p == 1.0

    def test_L4_full_space_index(self):
        psi = neel_state(4, "full")
        assert psi.amplitudes[0b1010] == 1.0
        assert np.count_nonzero(psi.amplitudes) == 1

    @pytest.mark.parametrize("L", [2, 4, 6, 10])
    def test_normalized(self, L):
        assert neel_state(L).norm() == 1.0

    def test_odd_L_sector_error(self):
        with pytest.raises(SectorError):
            neel_state(5)
        assert neel_state(5, "full").norm() == 1.0


class TestSerialization:
    def test_csv_and_json_round_trip(self):
        import json

        d = radial_distribution(uniform_superposition(4))
        rows = d.to_csv_rows()
        assert len(rows) == 5
        vals = [float(r.split(",")[1]) for r in rows]
        np.testing.assert_array_equal(vals, d.pi)  # 17 digits round-trip exactly
        payload = json.loads(d.to_json())
        assert payload["L"] == 4
        assert payload["anchor_bits"] == "0000"
        np.testing.assert_allclose(payload["pi"], d.pi, rtol=0, atol=0)


class TestSpaceInvariants:
    def test_sector_dimension(self):
        assert FockSpace(6, "sz-zero").dim == math.comb(6, 3)
        assert FockSpace(6, "full").dim == 64

    def test_norm_validation(self):
        space = FockSpace(2, "full")
        with pytest.raises(InvalidStateError):
            StateVector(space, np.array([1.0, 1.0, 0, 0]))

    def test_odd_L_sector_rejected(self):
        with pytest.raises(SectorError):
            FockSpace(5, "sz-zero")
