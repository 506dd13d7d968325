"""Sampler correctness: determinism, Poisson counts, event placement, I/O."""

import numpy as np
import pytest
from scipy.stats import ks_2samp

from shiftpois.fourier import FourierTable
from shiftpois.model import CosineIntensity, LaplaceShift
from shiftpois.simulate import (SimSeed, read_events_jsonl, sample_dataset,
                                sample_shifts, sample_trajectory,
                                write_events_jsonl)


def _ks_against(events: np.ndarray, table: FourierTable) -> float:
    """sup-distance of the empirical CDF to the normalized intensity CDF."""
    G = 1 << 15
    vals = np.maximum(table.grid_values(G), 0.0)
    masses = (vals + np.roll(vals, -1)) / (2 * G)
    cdf = np.concatenate([[0.0], np.cumsum(masses)])
    cdf /= cdf[-1]
    nodes = np.arange(G + 1) / G
    x = np.sort(events)
    fx = np.interp(x, nodes, cdf)
    n = x.size
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    return max(np.max(emp_hi - fx), np.max(fx - emp_lo))


def test_seed_reproducibility():
    lam, g = CosineIntensity(2.0, 1.0), LaplaceShift(0.05)
    a = sample_dataset(lam, g, 100, SimSeed(7, 3))
    b = sample_dataset(lam, g, 100, SimSeed(7, 3))
    assert np.array_equal(a.events, b.events)
    assert np.array_equal(a.offsets, b.offsets)
    assert np.array_equal(a.shifts, b.shifts)
    c = sample_dataset(lam, g, 100, SimSeed(7, 4))
    assert not np.array_equal(a.events, c.events)


def test_seed_validation():
    with pytest.raises(ValueError):
        SimSeed(-1)
    with pytest.raises(ValueError):
        SimSeed(0, -2)
    assert SimSeed(5).stream(9) == SimSeed(5, 9)


def test_zero_intensity_gives_empty_trajectories():
    lam = CosineIntensity(0.0, 0.0)
    for r in range(20):
        assert sample_trajectory(lam, 0.3, SimSeed(1, r)).size == 0
    data = sample_dataset(lam, LaplaceShift(0.1), 1, SimSeed(2))
    assert data.n == 1 and data.total_events == 0


def test_counts_are_poisson_with_intensity_mass():
    lam = CosineIntensity(2.0, 1.0)
    data = sample_dataset(lam, LaplaceShift(0.05), 10 ** 5, SimSeed(11))
    counts = data.counts
    se = np.std(counts) / np.sqrt(counts.size)
    assert abs(np.mean(counts) - 2.0) < 3 * se


def test_count_distribution_invariant_to_shift():
    # periodic mass: integral of lambda(. - tau) does not depend on tau
    lam = CosineIntensity(2.0, 1.0)
    n = 20000
    a = sample_dataset(lam, None, n, SimSeed(3, 0), shifts=np.zeros(n))
    b = sample_dataset(lam, None, n, SimSeed(3, 1), shifts=np.full(n, 0.37))
    assert ks_2samp(a.counts, b.counts).pvalue > 1e-3


def test_trajectory_events_sorted_in_unit_interval():
    lam = CosineIntensity(2.0, 1.0)
    for r in range(50):
        t = sample_trajectory(lam, 0.37, SimSeed(8, r))
        if t.size:
            assert t.min() >= 0.0 and t.max() < 1.0
            assert np.all(np.diff(t) >= 0.0)


def test_event_placement_matches_shifted_density():
    # one fixed shift: pooled events across replications follow
    # lambda(. - tau)/mass
    lam = CosineIntensity(2.0, 1.0)
    tau = 0.37
    rng = SimSeed(21).generator()
    events = np.concatenate([sample_trajectory(lam, tau, rng)
                             for _ in range(4000)])
    shifted = FourierTable.from_pairs(
        {ell: lam.theta(ell) * np.exp(-2j * np.pi * ell * tau)
         for ell in (-1, 0, 1)})
    assert _ks_against(events, shifted) < 0.015


def test_pooled_events_match_convolution():
    # random shifts: pooled events follow (lambda * g)/mass
    lam, g = CosineIntensity(2.0, 1.0), LaplaceShift(0.05)
    data = sample_dataset(lam, g, 10 ** 4, SimSeed(5))
    conv = FourierTable.from_pairs(
        {ell: lam.theta(ell) * g.gamma(ell) for ell in (-1, 0, 1)})
    assert _ks_against(data.events, conv) < 0.01


def test_superposition_after_unshifting():
    lam, g = CosineIntensity(2.0, 1.0), LaplaceShift(0.05)
    data = sample_dataset(lam, g, 5 * 10 ** 4, SimSeed(6))
    unshifted = (data.events - np.repeat(data.shifts, data.counts)) % 1.0
    assert _ks_against(unshifted, lam.fourier_table(1)) < 0.01


def test_conditional_mean_of_cosine_statistic():
    # E[sum cos(2 pi T) | tau] = Re(e^{2 pi i tau} conj(theta_1))
    lam = CosineIntensity(2.0, 1.0)
    tau = 0.3
    rng = SimSeed(31).generator()
    vals = np.array([np.sum(np.cos(2 * np.pi * sample_trajectory(lam, tau, rng)))
                     for _ in range(20000)])
    expect = 0.5 * np.cos(2 * np.pi * tau)
    se = np.std(vals, ddof=1) / np.sqrt(vals.size)
    assert abs(np.mean(vals) - expect) < 3 * se


def test_shift_sampler_moments():
    g = LaplaceShift(1e-9)
    x = sample_shifts(g, 10 ** 5, SimSeed(1))
    assert abs(np.mean(x)) < 1e-4


def test_explicit_shifts_are_used_verbatim():
    lam = CosineIntensity(2.0, 1.0)
    shifts = np.linspace(-0.4, 0.4, 50)
    data = sample_dataset(lam, None, 50, SimSeed(9), shifts=shifts)
    assert np.array_equal(data.shifts, shifts)
    with pytest.raises(ValueError):
        sample_dataset(lam, None, 50, SimSeed(9), shifts=shifts[:10])
    with pytest.raises(ValueError):
        sample_dataset(lam, None, 50, SimSeed(9))  # no g, no shifts


def test_jsonl_round_trip(tmp_path):
    lam, g = CosineIntensity(2.0, 1.0), LaplaceShift(0.05)
    data = sample_dataset(lam, g, 64, SimSeed(17))
    path = tmp_path / "events.jsonl"
    write_events_jsonl(data, path, keep_shifts=True)
    back = read_events_jsonl(path)
    assert np.array_equal(back.events, data.events)
    assert np.array_equal(back.offsets, data.offsets)
    assert np.array_equal(back.shifts, data.shifts)
    # same file without shifts
    write_events_jsonl(data, path)
    assert read_events_jsonl(path).shifts is None


def test_jsonl_read_errors(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"i": 1, "events": []}\n')
    with pytest.raises(ValueError):
        read_events_jsonl(path)
    path.write_text("")
    with pytest.raises(ValueError):
        read_events_jsonl(path)
    path.write_text('{"i": 0, "events": [0.1], "shift": 0.2}\n'
                    '{"i": 1, "events": [0.3]}\n')
    with pytest.raises(ValueError):
        read_events_jsonl(path)
