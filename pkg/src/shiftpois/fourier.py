"""Band-limited Fourier coefficient tables on the unit circle.

Conventions used throughout the package:

    analysis     theta_l = integral_0^1 f(t) exp(-2*pi*i*l*t) dt
    synthesis    f(t)    = sum_l theta_l exp(+2*pi*i*l*t)

A real-valued f therefore has a conjugate-symmetric table,
theta_{-l} = conj(theta_l).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["FourierTable"]


def _as_int_array(ells) -> np.ndarray:
    arr = np.asarray(ells, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("frequency list must be one-dimensional")
    return arr


@dataclass(frozen=True)
class FourierTable:
    """Sparse complex coefficient table over integer frequencies.

    ells must be strictly increasing; values is the matching complex array.
    """

    ells: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ells = _as_int_array(self.ells)
        values = np.asarray(self.values, dtype=np.complex128)
        if ells.shape != values.shape:
            raise ValueError("frequency and value arrays differ in length")
        if ells.size > 1 and not np.all(np.diff(ells) > 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "ells", ells)
        object.__setattr__(self, "values", values)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_pairs(cls, pairs) -> "FourierTable":
        """Build from an iterable of (ell, value) pairs or a mapping."""
        if hasattr(pairs, "items"):
            pairs = pairs.items()
        items = sorted(pairs)
        ells = [p[0] for p in items]
        values = [p[1] for p in items]
        return cls(np.array(ells, dtype=np.int64), np.array(values, dtype=np.complex128))

    @classmethod
    def zero(cls) -> "FourierTable":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128))

    # -- accessors ----------------------------------------------------

    def value(self, ell: int) -> complex:
        """Coefficient at a single frequency (0 off the stored support)."""
        idx = np.searchsorted(self.ells, ell)
        if idx < self.ells.size and self.ells[idx] == ell:
            return complex(self.values[idx])
        return 0.0 + 0.0j

    def dense(self, L: int) -> np.ndarray:
        """Coefficients on -L..L as a length 2L+1 array (index ell + L)."""
        if L < 0:
            raise ValueError("L must be nonnegative")
        out = np.zeros(2 * L + 1, dtype=np.complex128)
        keep = np.abs(self.ells) <= L
        out[self.ells[keep] + L] = self.values[keep]
        return out

    @property
    def band_max(self) -> int:
        """Largest |ell| carried by the table (0 for the empty table)."""
        if self.ells.size == 0:
            return 0
        return int(np.max(np.abs(self.ells)))

    @property
    def mass(self) -> float:
        """Integral over one period, i.e. the frequency-zero coefficient."""
        return float(np.real(self.value(0)))

    def l2_energy(self) -> float:
        """Squared L2 norm of the synthesized function (Parseval)."""
        return float(np.sum(np.abs(self.values) ** 2))

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        neg = np.array([self.value(-int(l)) for l in self.ells])
        return bool(np.max(np.abs(neg - np.conj(self.values)), initial=0.0) <= tol)

    # -- evaluation ---------------------------------------------------

    def eval_at(self, points) -> np.ndarray:
        """Synthesize at arbitrary points (1-periodic), returning real values."""
        x = np.atleast_1d(np.asarray(points, dtype=np.float64))
        if self.ells.size == 0:
            return np.zeros_like(x)
        out = np.zeros(x.shape, dtype=np.complex128)
        # chunk frequencies to bound the outer-product workspace
        step = max(1, int(4e6 // max(x.size, 1)))
        for start in range(0, self.ells.size, step):
            ls = self.ells[start : start + step]
            vs = self.values[start : start + step]
            out += vs @ np.exp((2j * np.pi) * np.outer(ls, x))
        return np.real(out)

    def grid_values(self, G: int) -> np.ndarray:
        """Synthesize on the uniform grid t_q = q/G, q = 0..G-1.

        Pointwise exact for any G >= 1 (frequencies fold mod G, which leaves
        values at grid points unchanged).
        """
        if G < 1:
            raise ValueError("grid size must be positive")
        spectrum = np.zeros(G, dtype=np.complex128)
        np.add.at(spectrum, np.mod(self.ells, G), self.values)
        vals = np.fft.ifft(spectrum) * G
        resid = float(np.max(np.abs(vals.imag), initial=0.0))
        if resid > 1e-9 * max(1.0, float(np.max(np.abs(vals.real), initial=0.0))):
            raise ValueError("synthesis produced a non-real signal; "
                             "coefficient table is not conjugate-symmetric")
        return vals.real

    # -- arithmetic ---------------------------------------------------

    def add_constant(self, c: float) -> "FourierTable":
        """Return a table with c added to the frequency-zero coefficient."""
        idx = np.searchsorted(self.ells, 0)
        if idx < self.ells.size and self.ells[idx] == 0:
            values = self.values.copy()
            values[idx] = values[idx] + c
            return FourierTable(self.ells.copy(), values)
        ells = np.insert(self.ells, idx, 0)
        values = np.insert(self.values, idx, complex(c))
        return FourierTable(ells, values)

    def restrict(self, keep_mask) -> "FourierTable":
        mask = np.asarray(keep_mask, dtype=bool)
        return FourierTable(self.ells[mask], self.values[mask])
