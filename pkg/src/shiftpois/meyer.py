"""Periodized Meyer wavelet basis, handled entirely in the frequency domain.

The mother wavelet's Fourier transform lives on 2*pi/3 <= |omega| <= 8*pi/3,
so every periodized atom at level j touches only the integer frequencies

    Omega_j = { ell : 2^j/3 < |ell| < 2^(j+2)/3 },

and the scaling atoms at level j0 touch D_j0 = { ell : |ell| <= 2^(j0+1)/3 }.
Atoms are normalized so that each periodized 2^(j/2) psi(2^j t - k) has unit
L2 norm on [0, 1); the collection {phi_j0,k} + {psi_j,k : j >= j0} is an
orthonormal basis.

All transforms here are linear maps on coefficient tables; nothing in this
module touches data or randomness except the Monte Carlo sup-norm search.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fourier import FourierTable

__all__ = [
    "MAX_LEVEL",
    "WaveletCoefficients",
    "omega_set",
    "scaling_support",
    "wavelet_fourier_coeff",
    "scaling_fourier_coeff",
    "analyze",
    "synthesize",
    "detail_band_table",
    "scaling_band_table",
    "sup_for_bits",
    "sup_bound_constant",
    "deconvolved_wavelet",
    "DeconvolvedAtom",
]

# levels above this would put > 4 * 2^16 frequencies in one cached table
MAX_LEVEL = 16


def _aux(x: np.ndarray) -> np.ndarray:
    """C^3 polynomial ramp: 0 below 0, 1 above 1, x^4(35-84x+70x^2-20x^3) between."""
    x = np.asarray(x, dtype=np.float64)
    y = np.polyval([-20.0, 70.0, -84.0, 35.0, 0.0, 0.0, 0.0, 0.0], np.clip(x, 0.0, 1.0))
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, y))


def scaling_window(omega) -> np.ndarray:
    """Fourier transform of the Meyer scaling function (real, even)."""
    w = np.abs(np.asarray(omega, dtype=np.float64))
    out = np.zeros_like(w)
    out[w <= 2 * np.pi / 3] = 1.0
    mid = (w > 2 * np.pi / 3) & (w < 4 * np.pi / 3)
    out[mid] = np.cos(np.pi / 2 * _aux(3 * w[mid] / (2 * np.pi) - 1))
    return out


def wavelet_window(omega) -> np.ndarray:
    """Fourier transform of the Meyer mother wavelet, phase e^{-i omega/2} included."""
    om = np.asarray(omega, dtype=np.float64)
    w = np.abs(om)
    mag = np.zeros_like(w)
    lo = (w > 2 * np.pi / 3) & (w <= 4 * np.pi / 3)
    hi = (w > 4 * np.pi / 3) & (w < 8 * np.pi / 3)
    mag[lo] = np.sin(np.pi / 2 * _aux(3 * w[lo] / (2 * np.pi) - 1))
    mag[hi] = np.cos(np.pi / 2 * _aux(3 * w[hi] / (4 * np.pi) - 1))
    return mag * np.exp(-0.5j * om)


def _check_level(j: int) -> int:
    j = int(j)
    if j < 0:
        raise ValueError("resolution level must be nonnegative")
    if j > MAX_LEVEL:
        raise ValueError(f"resolution level {j} exceeds the cached maximum {MAX_LEVEL}")
    return j


def omega_set(j: int) -> np.ndarray:
    """Integer frequencies touched by detail atoms at level j (sorted)."""
    j = _check_level(j)
    lo = (1 << j) // 3 + 1          # smallest integer > 2^j / 3
    hi = (1 << (j + 2)) // 3        # largest integer < 2^(j+2) / 3 (never exact)
    pos = np.arange(lo, hi + 1, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def scaling_support(j0: int) -> np.ndarray:
    """Integer frequencies touched by scaling atoms at level j0 (sorted)."""
    j0 = _check_level(j0)
    hi = (1 << (j0 + 1)) // 3
    return np.arange(-hi, hi + 1, dtype=np.int64)


@lru_cache(maxsize=None)
def _detail_table(j: int):
    """(ells, weights) with weights_l = 2^(-j/2) psihat(2 pi l / 2^j)."""
    ells = omega_set(j)
    w = 2.0 ** (-j / 2) * wavelet_window(2 * np.pi * ells / (1 << j))
    w.setflags(write=False)
    ells.setflags(write=False)
    return ells, w


@lru_cache(maxsize=None)
def _scaling_table(j0: int):
    ells = scaling_support(j0)
    w = (2.0 ** (-j0 / 2) * scaling_window(2 * np.pi * ells / (1 << j0))).astype(np.complex128)
    w.setflags(write=False)
    ells.setflags(write=False)
    return ells, w


def _check_shift(j: int, k: int) -> int:
    k = int(k)
    if not 0 <= k < (1 << j):
        raise ValueError(f"shift index k={k} outside 0..{(1 << j) - 1} at level {j}")
    return k


def wavelet_fourier_coeff(j: int, k: int, ell: int) -> complex:
    """Fourier coefficient of the periodized detail atom psi_{j,k} at frequency ell."""
    j = _check_level(j)
    k = _check_shift(j, k)
    ells, w = _detail_table(j)
    idx = np.searchsorted(ells, ell)
    if idx >= ells.size or ells[idx] != ell:
        return 0.0 + 0.0j
    return complex(w[idx] * np.exp(-2j * np.pi * ell * k / (1 << j)))


def scaling_fourier_coeff(j0: int, k: int, ell: int) -> complex:
    """Fourier coefficient of the periodized scaling atom phi_{j0,k} at frequency ell."""
    j0 = _check_level(j0)
    k = _check_shift(j0, k)
    ells, w = _scaling_table(j0)
    idx = np.searchsorted(ells, ell)
    if idx >= ells.size or ells[idx] != ell:
        return 0.0 + 0.0j
    return complex(w[idx] * np.exp(-2j * np.pi * ell * k / (1 << j0)))


@dataclass
class WaveletCoefficients:
    """Real coefficients of an expansion over levels j0 .. j1.

    scaling has length 2^j0; detail[i] has length 2^(j0+i), one array per
    level j0, j0+1, ..., j1.
    """

    j0: int
    j1: int
    scaling: np.ndarray
    detail: list

    def __post_init__(self):
        if self.j0 > self.j1:
            raise ValueError("empty level range")
        if len(self.scaling) != (1 << self.j0):
            raise ValueError("scaling block has wrong length")
        for i, block in enumerate(self.detail):
            if len(block) != (1 << (self.j0 + i)):
                raise ValueError(f"detail block {i} has wrong length")
        if len(self.detail) != self.j1 - self.j0 + 1:
            raise ValueError("wrong number of detail blocks")

    def level(self, j: int) -> np.ndarray:
        return self.detail[j - self.j0]

    def rows(self):
        """Yield (type, j, k, value) rows for serialization."""
        for k, v in enumerate(self.scaling):
            yield ("scaling", self.j0, k, float(v))
        for i, block in enumerate(self.detail):
            for k, v in enumerate(block):
                yield ("detail", self.j0 + i, k, float(v))


def _dense_from(theta) -> FourierTable:
    if isinstance(theta, FourierTable):
        return theta
    return FourierTable.from_pairs(theta)


def _fold(ells: np.ndarray, vals: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=np.complex128)
    np.add.at(out, np.mod(ells, size), vals)
    return out


def analyze(theta, j0: int, j1: int, imag_tol: float = 1e-9) -> WaveletCoefficients:
    """Project a coefficient table onto the wavelet frame over levels j0..j1.

    theta may be a FourierTable or a mapping ell -> complex.  Inner products
    are computed in the frequency domain; a folded FFT handles all shifts of
    one level at once.  Imaginary residues above imag_tol trigger a warning
    (a conjugate-symmetric input always comes out real to rounding error).
    """
    j0, j1 = _check_level(j0), _check_level(j1)
    if j0 > j1:
        raise ValueError("j0 must not exceed j1")
    table = _dense_from(theta)

    worst_imag = 0.0

    def _level_coeffs(ells, w, level_size):
        nonlocal worst_imag
        vals = np.array([table.value(int(l)) for l in ells], dtype=np.complex128)
        folded = _fold(ells, np.conj(w) * vals, level_size)
        coeffs = np.fft.ifft(folded) * level_size
        worst_imag = max(worst_imag, float(np.max(np.abs(coeffs.imag), initial=0.0)))
        return coeffs.real.copy()

    ells, w = _scaling_table(j0)
    scaling = _level_coeffs(ells, w, 1 << j0)

    detail = []
    for j in range(j0, j1 + 1):
        ells, w = _detail_table(j)
        detail.append(_level_coeffs(ells, w, 1 << j))

    if worst_imag > imag_tol:
        warnings.warn(
            f"wavelet analysis dropped imaginary parts up to {worst_imag:.3e}; "
            "input table was not conjugate-symmetric",
            RuntimeWarning,
            stacklevel=2,
        )
    return WaveletCoefficients(j0=j0, j1=j1, scaling=scaling, detail=detail)


def synthesize(coeffs: WaveletCoefficients, G: int | None = None):
    """Rebuild the Fourier table spanned by a coefficient set.

    Returns the FourierTable, or (table, grid_values) when a grid size G is
    given.  G must cover the highest detail band (G >= 2 * max frequency).
    """
    j0, j1 = coeffs.j0, coeffs.j1
    hi = int(omega_set(j1)[-1])
    lo_band = scaling_support(j0)

    dense = np.zeros(2 * hi + 1, dtype=np.complex128)  # index ell + hi
    support = np.zeros(2 * hi + 1, dtype=bool)

    ells, w = _scaling_table(j0)
    spectrum = np.fft.fft(np.asarray(coeffs.scaling, dtype=np.complex128))
    dense[ells + hi] += w * spectrum[np.mod(ells, 1 << j0)]
    support[ells + hi] = True

    for j in range(j0, j1 + 1):
        ells, w = _detail_table(j)
        spectrum = np.fft.fft(np.asarray(coeffs.level(j), dtype=np.complex128))
        dense[ells + hi] += w * spectrum[np.mod(ells, 1 << j)]
        support[ells + hi] = True

    out_ells = np.nonzero(support)[0].astype(np.int64) - hi
    table = FourierTable(out_ells, dense[support])
    if G is None:
        return table
    if G < 2 * hi:
        raise ValueError(f"grid size {G} cannot resolve frequencies up to {hi}")
    return table, table.grid_values(int(G))


def detail_band_table(j: int, weights) -> FourierTable:
    """Fourier table of sum_k weights_k psi_{j,k} for one detail level."""
    j = _check_level(j)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != ((1 << j),):
        raise ValueError(f"need 2^{j} weights at level {j}")
    ells, w = _detail_table(j)
    spectrum = np.fft.fft(weights.astype(np.complex128))
    return FourierTable(ells, w * spectrum[np.mod(ells, 1 << j)])


def scaling_band_table(j0: int, weights) -> FourierTable:
    """Fourier table of sum_k weights_k phi_{j0,k} for the scaling level."""
    j0 = _check_level(j0)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != ((1 << j0),):
        raise ValueError(f"need 2^{j0} weights at level {j0}")
    ells, w = _scaling_table(j0)
    spectrum = np.fft.fft(weights.astype(np.complex128))
    return FourierTable(ells, w * spectrum[np.mod(ells, 1 << j0)])


def sup_for_bits(j: int, bits, oversample: int = 64) -> float:
    """sup_t | sum_k bits_k psi_{j,k}(t) | / 2^(j/2), on a grid of 2^j * oversample points."""
    table = detail_band_table(j, bits)
    grid = table.grid_values(int((1 << j) * oversample))
    return float(np.max(np.abs(grid)) * 2.0 ** (-j / 2))


def sup_bound_constant(j: int, trials: int = 64, seed: int = 0) -> float:
    """Monte Carlo estimate of sup over binary coefficient patterns at level j.

    Maximizes sup_for_bits over `trials` uniform random bit vectors; the
    all-ones pattern is always included.  Used to size the constant offset
    that keeps binary wavelet perturbations nonnegative.
    """
    j = _check_level(j)
    rng = np.random.default_rng(seed)
    best = sup_for_bits(j, np.ones(1 << j))
    for _ in range(int(trials)):
        best = max(best, sup_for_bits(j, rng.integers(0, 2, 1 << j)))
    return best


@dataclass(frozen=True)
class DeconvolvedAtom:
    """Frequency table of psi~_{j,k} = sum_l c_l(psi_{j,k}) / gamma_l e_l."""

    j: int
    k: int
    table: FourierTable
    l2_sq: float
    sup_norm: float


def deconvolved_wavelet(j: int, k: int, g) -> DeconvolvedAtom:
    """Divide a detail atom's coefficients by the shift characteristic function.

    g must expose gamma_many(ells) -> complex array.  The returned sup_norm is
    a dense-grid maximum (64x oversampling), intended for diagnostics.
    """
    j = _check_level(j)
    k = _check_shift(j, k)
    ells, w = _detail_table(j)
    c = w * np.exp(-2j * np.pi * ells * k / (1 << j))
    gamma = np.asarray(g.gamma_many(ells), dtype=np.complex128)
    if np.any(np.abs(gamma) == 0.0):
        raise ZeroDivisionError("shift density has a vanishing Fourier coefficient in the band")
    vals = c / gamma
    table = FourierTable(ells, vals)
    grid = table.grid_values(int((1 << j) * 64))
    return DeconvolvedAtom(
        j=j,
        k=k,
        table=table,
        l2_sq=float(np.sum(np.abs(vals) ** 2)),
        sup_norm=float(np.max(np.abs(grid))),
    )
