"""Binary reflected Gray labeling of 2^m-ASK.

The label of a point x = s*a splits into a sign bit B1 (0 for positive) and
m-1 amplitude bits carrying the Gray code of the amplitude index, mirrored
on the negative side.  Adjacent points then differ in exactly one bit, and
for any input distribution symmetric around zero the sign bit is uniform
and independent of the amplitude bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AmplitudeAlphabet
from .errors import ConfigError

__all__ = ["BrgcLabeling"]


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _gray_inverse(g: int) -> int:
    i = 0
    while g:
        i ^= g
        g >>= 1
    return i


@dataclass(frozen=True)
class BrgcLabeling:
    """Bidirectional point<->label and amplitude<->bit-word maps."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"need m >= 1, got {self.m}")

    @property
    def alph(self) -> AmplitudeAlphabet:
        return AmplitudeAlphabet(self.m)

    @property
    def points(self) -> np.ndarray:
        """Constellation points ordered negative amplitudes first: -1,-3,...,1,3,..."""
        amps = self.alph.level_array()
        return np.concatenate([-amps, amps])

    def labels(self) -> np.ndarray:
        """(2^m, m) bit matrix aligned to :attr:`points`; column 0 is the sign bit."""
        n_a = self.alph.n_a
        out = np.zeros((2 * n_a, self.m), dtype=np.int8)
        for half, sign_bit in ((0, 1), (1, 0)):  # negative points carry B1=1
            for i in range(n_a):
                g = _gray(i)
                row = half * n_a + i
                out[row, 0] = sign_bit
                for t in range(self.m - 1):
                    out[row, 1 + t] = (g >> (self.m - 2 - t)) & 1
        return out

    def bitsets(self) -> np.ndarray:
        """(m, 2, 2^m) boolean masks: bitsets()[j, u] selects points with B_j = u."""
        lab = self.labels()
        out = np.zeros((self.m, 2, len(lab)), dtype=bool)
        for j in range(self.m):
            out[j, 0] = lab[:, j] == 0
            out[j, 1] = lab[:, j] == 1
        return out

    def amplitude_bits(self, amplitude: int) -> tuple[int, ...]:
        """The m-1 amplitude bits (B2..Bm) of one amplitude level."""
        g = _gray(self.alph.index_of(amplitude))
        return tuple((g >> (self.m - 2 - t)) & 1 for t in range(self.m - 1))

    def amplitude_from_bits(self, bits) -> int:
        g = 0
        for b in bits:
            g = (g << 1) | (int(b) & 1)
        return self.alph.levels[_gray_inverse(g)]

    def point_label(self, x: int) -> tuple[int, ...]:
        sign_bit = 0 if x > 0 else 1
        return (sign_bit,) + self.amplitude_bits(abs(x))

    def sign_from_bit(self, b: int) -> int:
        return -1 if b else 1
