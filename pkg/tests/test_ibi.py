import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import MC_FROZEN_ENERGY, MC_LAYOUT, MC_SPEC, monte_carlo_ibi
from ibilab import DomainError
from ibilab.basis import Domain, FrameLayout, build_basis
from ibilab.channel import ChannelSpec, PathSpec, exponential_profile
from ibilab.ibi import (bandlimited_shift, cross_correlation, cross_correlation_tensor,
                        half_shift_conjecture, ibi_bound, ibi_energy_direct, ibi_energy_exact,
                        s2ibi_sweep, tail_energy, truncation_check)


def brute_xcorr(p_r, p_s):
    n = len(p_r)
    out = np.zeros(2 * n - 1, dtype=complex)
    for q in range(-(n - 1), n):
        for k in range(n):
            if 0 <= k - q < n:
                out[q + n - 1] += np.conj(p_r[k]) * p_s[k - q]
    return out


class TestCrossCorrelation:
    def test_impulses(self):
        c = cross_correlation([1, 0, 0], [1, 0, 0])
        np.testing.assert_array_equal(c.values, [0, 0, 1, 0, 0])

    def test_ones(self):
        c = cross_correlation(np.ones(2), np.ones(2))
        np.testing.assert_array_equal(c.values, [1, 2, 1])
        assert c.at(0) == 2

    def test_shifted_impulse(self):
        # p_s = e_1, p_r = e_0: the only nonzero lag has n = 0, n - q = 1.
        c = cross_correlation([1, 0], [0, 1])
        assert c.at(-1) == 1 and c.at(1) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 12), st.integers(0, 10_000))
    def test_matches_brute_force(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        np.testing.assert_allclose(cross_correlation(a, b).values, brute_xcorr(a, b), atol=1e-12)
        # Hermitian symmetry c_rs[q] = conj(c_sr[-q]).
        np.testing.assert_allclose(cross_correlation(a, b).values,
                                   np.conj(cross_correlation(b, a).values[::-1]), atol=1e-12)

    @pytest.mark.parametrize("domain", list(Domain))
    def test_unit_norm_zero_lag(self, domain):
        b = build_basis(domain, 16, 0.75)
        for r in range(b.used_dims):
            assert cross_correlation(b.matrix[:, r], b.matrix[:, r]).at(0) == pytest.approx(1, abs=1e-12)

    def test_tensor_matches_pairwise(self):
        b = build_basis("FD", 9, 0.8)
        T = cross_correlation_tensor(b.matrix)
        for r in range(b.used_dims):
            for s in range(b.used_dims):
                np.testing.assert_allclose(
                    T[:, r, s], cross_correlation(b.matrix[:, r], b.matrix[:, s]).values, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            cross_correlation(np.ones(3), np.ones(4))


class TestBandlimitedShift:
    def test_zero_shift_identity(self):
        seq = np.array([0.0, 1.0, 2.0, 3.0, 0.0])
        np.testing.assert_allclose(bandlimited_shift(seq, 0.0, 2), seq, atol=1e-15)

    def test_half_shift_delta(self):
        out = bandlimited_shift(np.array([0.0, 1.0, 0.0]), 0.5, 1)
        assert out[1] == pytest.approx(2 / np.pi, rel=1e-14)

    @given(st.floats(-2, 2), st.integers(0, 1000))
    def test_direct_sum(self, shift, seed):
        seq = np.random.default_rng(seed).standard_normal(7)
        out = bandlimited_shift(seq, shift, 5)
        for i, k in enumerate(range(-5, 6)):
            direct = sum(seq[j] * np.sinc(q - shift - k) for j, q in enumerate(range(-3, 4)))
            assert out[i] == pytest.approx(direct, abs=1e-12)

    def test_even_length_rejected(self):
        with pytest.raises(DomainError):
            bandlimited_shift(np.ones(4), 0.5, 3)


class TestTailEnergy:
    def test_inside_window(self):
        assert tail_energy(np.array([0, 0, 1.0, 0, 0]), 1).energy == 0

    def test_all_outside(self):
        assert tail_energy(np.array([1.0, 0, 0, 0, 1.0]), 1).energy == 2

    def test_shifted_delta_oracle(self):
        T = 64
        shifted = bandlimited_shift(np.array([1.0]), 0.5, T)
        k = np.arange(-T, T + 1)
        expected = np.sum(np.sinc(-0.5 - k[np.abs(k) > 4]) ** 2)
        te = tail_energy(shifted, 4)
        assert te.energy == pytest.approx(expected, rel=1e-12)
        assert te.truncation < 1e-4

    def test_bad_width(self):
        with pytest.raises(DomainError):
            tail_energy(np.ones(5), 2)


def _single(tau):
    return ChannelSpec((PathSpec(1.0, tau),), normalize_power=False)


class TestExactIbi:
    @pytest.mark.parametrize("domain", list(Domain))
    @pytest.mark.parametrize("eta", [1.0, 0.75])
    def test_matches_direct_full_frame(self, domain, eta):
        lay = FrameLayout(5, 12, 3)
        spec = exponential_profile(0.5, 0.5, 3, seed=4)
        b = build_basis(domain, 12, eta)
        np.testing.assert_allclose(ibi_energy_exact(b, lay, spec).per_waveform_energy,
                                   ibi_energy_direct(b, lay, spec), rtol=1e-9, atol=1e-18)

    def test_monte_carlo_oracle(self):
        exact = ibi_energy_exact(build_basis("TD", 8, 1.0), MC_LAYOUT, MC_SPEC)
        assert np.mean(exact.per_waveform_energy) == pytest.approx(MC_FROZEN_ENERGY, rel=0.01)

    def test_monte_carlo_rerun_small(self):
        mc = monte_carlo_ibi(MC_LAYOUT, MC_SPEC, 50_000, seed=5)
        assert mc == pytest.approx(MC_FROZEN_ENERGY, rel=0.03)

    @pytest.mark.parametrize("domain", list(Domain))
    def test_integer_taps_zero(self, domain):
        lay = FrameLayout(7, 16, 4)
        spec = exponential_profile(0.5, 1.0, 4, seed=2)
        rep = ibi_energy_exact(build_basis(domain, 16, 0.8), lay, spec)
        assert rep.total_energy <= 1e-20
        assert rep.s2ibi_db > 150

    def test_unitary_equivalence_at_full_utilization(self):
        lay = FrameLayout(7, 16, 2)
        spec = exponential_profile(0.3, 0.3, 2, seed=1)
        vals = [ibi_energy_exact(build_basis(d, 16, 1.0), lay, spec).s2ibi_db for d in Domain]
        assert max(vals) - min(vals) <= 1e-8

    def test_truncation_small(self):
        lay = FrameLayout(9, 16, 2)
        b = build_basis("PS", 16, 0.75)
        assert truncation_check(b, lay, _single(0.5)) <= 0.1

    def test_cyclic_prefix_rejected(self):
        lay = FrameLayout(3, 8, 2, guard_mode="cp")
        with pytest.raises(DomainError):
            ibi_energy_exact(build_basis("TD", 8, 1.0), lay, _single(0.5))

    def test_doppler_rejected(self):
        spec = ChannelSpec((PathSpec(1.0, 0.5, 0.01),), normalize_power=False)
        with pytest.raises(DomainError):
            ibi_energy_exact(build_basis("TD", 8, 1.0), FrameLayout(3, 8, 2), spec)


class TestBound:
    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(list(Domain)), st.floats(0.5, 1.0), st.floats(0.05, 3.95),
           st.integers(0, 100))
    def test_bound_dominates(self, domain, eta, tau, seed):
        lay = FrameLayout(9, 16, 4)
        spec = ChannelSpec((PathSpec(1.0, tau),), normalize_power=False)
        b = build_basis(domain, 16, eta)
        exact = ibi_energy_exact(b, lay, spec).total_energy
        assert ibi_bound(b, lay, spec) >= exact * (1 - 1e-9)

    def test_integer_channel_bound_is_zero(self, caplog):
        with caplog.at_level(logging.INFO):
            assert ibi_bound(build_basis("TD", 8, 1.0), FrameLayout(3, 8, 2), _single(1.0)) == 0.0

    def test_subset(self):
        lay = FrameLayout(5, 12, 2)
        b = build_basis("PS", 12, 1.0)
        assert ibi_bound(b, lay, _single(0.5), subset_size=3) <= ibi_bound(b, lay, _single(0.5))
        with pytest.raises(DomainError):
            ibi_bound(b, lay, _single(0.5), subset_size=13)

    def test_delay_beyond_guard_rejected(self):
        with pytest.raises(DomainError):
            ibi_bound(build_basis("TD", 8, 1.0), FrameLayout(3, 8, 2), _single(11.5))


def test_sweep_order_and_threads():
    lay = FrameLayout(5, 16, 2)
    spec = _single(0.5)
    a = s2ibi_sweep(["TD", "PS"], [1.0, 0.75], spec, lay, threads=1)
    b = s2ibi_sweep(["TD", "PS"], [1.0, 0.75], spec, lay, threads=3)
    assert [(r.domain, r.used_dims) for r in a] == [("TD", 16), ("TD", 12), ("PS", 16), ("PS", 12)]
    assert [r.s2ibi_db for r in a] == [r.s2ibi_db for r in b]
    assert all(r.s2ibi_lower_bound_db <= r.s2ibi_db + 1e-9 for r in a)


def test_half_shift_conjecture_runs():
    b = build_basis("PS", 8, 0.75)
    res = half_shift_conjecture(b, inner_half_width=8, window=64, max_pairs=10)
    assert res["pairs"] == 10
    assert set(res["tail_energy"]) == {0.1, 0.2, 0.3, 0.4, 0.5}
    assert all(v >= 0 for v in res["tail_energy"].values())
