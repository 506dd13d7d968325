"""Hypercube test intensities and Poisson likelihood-ratio checks."""

import math

import numpy as np
import pytest

from shiftpois.fourier import FourierTable
from shiftpois.meyer import analyze
from shiftpois.model import CosineIntensity, PolyDecayIntensity
from shiftpois.oracle import (AssouadSpec, assouad_intensity,
                              change_of_measure_check, girsanov_log_ratio,
                              girsanov_log_ratios, mass_scale_schedule)
from shiftpois.model import TrajectorySet

_OMEGA8 = (1, 0, 1, 1, 0, 0, 1, 0)


def test_spec_validation():
    AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.3)
    with pytest.raises(ValueError):
        AssouadSpec(D=11, omega=(0,) * 2048, s=1.5, c=0.1)
    with pytest.raises(ValueError):
        AssouadSpec(D=3, omega=(1, 0, 1), s=1.5, c=0.3)
    with pytest.raises(ValueError):
        AssouadSpec(D=1, omega=(1, 2), s=1.5, c=0.3)
    with pytest.raises(ValueError):
        AssouadSpec(D=3, omega=_OMEGA8, s=0.0, c=0.3)
    with pytest.raises(ValueError):
        AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.0)
    with pytest.raises(ValueError):  # c above A/(2 + c_psi)
        AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.7, A=2.0, c_psi=1.0)
    with pytest.raises(ValueError):
        AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.3, c_psi=-1.0)
    # omega coerces to a bit tuple
    spec = AssouadSpec(D=2, omega=np.array([1.0, 0.0, 0.0, 1.0]), s=2.0, c=0.2)
    assert spec.omega == (1, 0, 0, 1)
    assert AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.3, c_psi=2.0).resolved_c_psi() == 2.0


def test_geometry_scales():
    spec = AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.3)
    assert spec.xi == pytest.approx(0.3 * 2.0 ** (-3 * 2.0), rel=1e-15)
    assert spec.mass_scale == pytest.approx(0.3 * 2.0 ** (-4.5), rel=1e-15)
    assert spec.mass_scale == pytest.approx(2.0 ** 1.5 * spec.xi, rel=1e-15)
    cfg = spec.config()
    assert cfg["omega"] == list(_OMEGA8)
    assert cfg["c_psi"] == spec.resolved_c_psi()


def test_all_zero_vertex_is_flat():
    spec = AssouadSpec(D=3, omega=(0,) * 8, s=1.5, c=0.3, c_psi=1.8)
    lam = assouad_intensity(spec)
    level = 1.0 + spec.xi * 2.0 ** 1.5 * 1.8  # A/2 plus the safety offset
    assert lam.total_mass == pytest.approx(level, rel=1e-14)
    assert np.allclose(lam.eval_on_grid(64), level, atol=1e-12)


def test_coefficient_recovery_and_bit_flip():
    spec = AssouadSpec(D=3, omega=_OMEGA8, s=1.5, c=0.3)
    lam = assouad_intensity(spec)
    table = lam.fourier_table(lam.band_limit)
    coeffs = analyze(table, 3, 3)
    assert np.allclose(coeffs.detail[0], spec.xi * np.array(_OMEGA8), atol=1e-12)

    flipped = list(_OMEGA8)
    flipped[2] ^= 1
    other = assouad_intensity(AssouadSpec(D=3, omega=tuple(flipped), s=1.5, c=0.3))
    diff = (lam.fourier_table(lam.band_limit).dense(lam.band_limit)
            - other.fourier_table(other.band_limit).dense(lam.band_limit))
    assert float(np.sum(np.abs(diff) ** 2)) == pytest.approx(spec.xi ** 2, rel=1e-12)


def test_vertices_stay_above_half_mass():
    rng = np.random.default_rng(12)
    for D in (2, 4):
        cap = 2.0 / (2.0 + AssouadSpec(D=0, omega=(0,), s=1.0, c=0.1).resolved_c_psi())
        spec = AssouadSpec(D=D, omega=rng.integers(0, 2, 1 << D), s=1.2, c=cap)
        lam = assouad_intensity(spec)
        assert lam.eval_on_grid(1 << 12).min() >= 1.0 - 1e-9  # A/2 = 1


def test_log_ratio_trivial_cases():
    zero = FourierTable.zero()
    assert girsanov_log_ratio([0.12, 0.7, 0.99], 1.3, zero) == 0.0
    mu = FourierTable(np.array([-1, 0, 1]), np.array([0.1, 0.4, 0.1], dtype=complex))
    assert girsanov_log_ratio([], 1.0, mu) == pytest.approx(-0.4, rel=1e-15)


def test_log_ratio_manual_cosine():
    mu = FourierTable(np.array([-1, 0, 1]), np.array([0.1, 0.4, 0.1], dtype=complex))
    events = np.array([0.1, 0.5, 0.9])
    rho, tau = 0.7, 0.3
    want = -0.4 + sum(
        math.log1p((0.4 + 0.2 * math.cos(2 * math.pi * (t - tau))) / rho)
        for t in events)
    got = girsanov_log_ratio(events, rho, mu, tau=tau)
    assert got == pytest.approx(want, rel=1e-12)
    # an intensity family with a finite band works the same way
    lam = CosineIntensity(0.4, 0.2)
    assert girsanov_log_ratio(events, rho, lam, tau=tau) == pytest.approx(want, rel=1e-12)


def test_log_ratio_input_validation():
    mu = FourierTable(np.array([0]), np.array([-0.5 + 0j]))
    with pytest.raises(ValueError, match="negative"):
        girsanov_log_ratio([0.5], 1.0, mu)
    with pytest.raises(ValueError, match="band-limited"):
        girsanov_log_ratio([0.5], 1.0, PolyDecayIntensity(1.5))
    with pytest.raises(TypeError):
        girsanov_log_ratio([0.5], 1.0, "mu")
    with pytest.raises(ValueError):
        girsanov_log_ratio([0.5], 0.0, FourierTable.zero())


def test_vectorized_ratios_match_loop():
    mu = CosineIntensity(0.4, 0.2)
    data = TrajectorySet.from_lists([[0.2], [], [0.5, 0.7, 0.71], [], [0.9]])
    got = girsanov_log_ratios(data, 0.8, mu, tau=0.1)
    for i in range(data.n):
        want = girsanov_log_ratio(data.trajectory(i), 0.8, mu, tau=0.1)
        assert got[i] == pytest.approx(want, rel=1e-14)
    # trailing empty trajectories keep their own -mass entries
    pair = TrajectorySet.from_lists([[0.2, 0.4], []])
    vals = girsanov_log_ratios(pair, 1.0, mu)
    assert vals[1] == pytest.approx(-mu.total_mass, rel=1e-15)


def test_unit_expectation_under_null():
    mu = FourierTable(np.array([-1, 0, 1]), np.array([0.15, 0.3, 0.15], dtype=complex))
    res = change_of_measure_check(lambda traj: 1.0, 1.0, mu, R=4000, root_seed=100)
    assert res.lhs_mean == 1.0 and res.lhs_stderr == 0.0
    assert abs(res.rhs_mean - 1.0) < 4 * res.rhs_stderr
    assert res.to_dict()["gap_sigmas"] == res.gap_sigmas


def test_change_of_measure_functionals():
    mu = FourierTable(np.array([-1, 0, 1]), np.array([0.15, 0.3, 0.15], dtype=complex))
    rho = 1.0

    count = change_of_measure_check(len, rho, mu, R=4000, root_seed=200)
    assert abs(count.lhs_mean - (rho + 0.3)) < 4 * count.lhs_stderr
    assert count.gap_sigmas < 4.0

    def first_harmonic(traj):
        return float(np.sum(np.cos(2 * np.pi * np.asarray(traj))))

    harm = change_of_measure_check(first_harmonic, rho, mu, R=4000, root_seed=300)
    assert harm.gap_sigmas < 4.0
    # E_alt[sum cos(2 pi T)] = Re theta_1(rho + mu) = 0.15
    assert abs(harm.lhs_mean - 0.15) < 4 * harm.lhs_stderr

    with pytest.raises(ValueError):
        change_of_measure_check(len, rho, mu, R=1, root_seed=0)


def test_mass_scale_schedule():
    ns = np.array([2.0 ** k for k in range(10, 25)])
    m, nm3 = mass_scale_schedule(5.5, 2.0, ns, c=1.0)
    d = 2 * 5.5 + 2 * 2.0 + 1
    assert np.allclose(m, ns ** (-5.5 / d), rtol=1e-12)
    assert np.all(np.diff(m) < 0)
    assert np.all(np.diff(nm3) < 0)  # s > 2 nu + 1: detectability decays
    with pytest.raises(ValueError):
        mass_scale_schedule(5.5, 2.0, [1])
