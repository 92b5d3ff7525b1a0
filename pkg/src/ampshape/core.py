"""Alphabets, distributions, compositions and exact combinatorics.

Everything downstream (the four shapers, the analytics and the link
simulator) works on 2^m-ASK amplitude alphabets A = {1, 3, ..., 2^m - 1}
with a Maxwell-Boltzmann target distribution.  This module holds the shared
ground types plus the two workhorse primitives: exact multinomial counting
(arbitrary precision, used as sequence-set cardinality) and n-type
quantization of a PMF by Kullback-Leibler divergence.

All objects are immutable after construction and all functions are pure,
so everything here is safe to share across threads or worker processes.
Probabilities are plain float arrays aligned to the alphabet levels;
counts are Python ints (arbitrary precision).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError

__all__ = [
    "AmplitudeAlphabet",
    "BitWord",
    "Composition",
    "MBDistribution",
    "multinomial",
    "entropy",
    "avg_energy",
    "mb_pmf",
    "mb_from_entropy",
    "optimize_mb",
    "quantize_pmf",
]

LAMBDA_MAX = 10.0  # MB rate parameter search bracket; 8-ASK entropies of interest sit well inside


@dataclass(frozen=True)
class AmplitudeAlphabet:
    """Amplitude half of a 2^m-ASK constellation: {1, 3, ..., 2^m - 1}."""

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError(f"need m >= 1, got {self.m}")

    @property
    def levels(self) -> tuple[int, ...]:
        return tuple(2 * j + 1 for j in range(self.n_a))

    @property
    def n_a(self) -> int:
        return 1 << (self.m - 1)

    def level_array(self) -> np.ndarray:
        return np.array(self.levels, dtype=float)

    def index_of(self, amplitude: int) -> int:
        j, r = divmod(amplitude - 1, 2)
        if r or not (0 <= j < self.n_a):
            raise ConfigError(f"{amplitude} is not a level of the {1 << self.m}-ASK amplitude alphabet")
        return j


@dataclass(frozen=True)
class BitWord:
    """Fixed-length binary word; ``value`` is the MSB-first integer reading."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 0 or not (0 <= self.value < (1 << self.length) if self.length else self.value == 0):
            raise ConfigError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_bits(cls, bits) -> "BitWord":
        v = 0
        for b in bits:
            v = (v << 1) | (int(b) & 1)
        return cls(v, len(bits))

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BitWord":
        """Read ``length`` bits from a hex string, MSB first, left-aligned."""
        text = text.strip()
        nibbles = (length + 3) // 4
        if len(text) < nibbles:
            raise ConfigError(f"hex string with {len(text)} digits is too short for {length} bits")
        v = int(text[:nibbles] or "0", 16)
        v >>= 4 * nibbles - length
        return cls(v, length)

    def to_bits(self) -> list[int]:
        return [(self.value >> (self.length - 1 - i)) & 1 for i in range(self.length)]

    def to_hex(self) -> str:
        """Hex string, MSB first; final nibble zero-padded on the LSB side."""
        nibbles = (self.length + 3) // 4
        if nibbles == 0:
            return ""
        return format(self.value << (4 * nibbles - self.length), f"0{nibbles}x")


@dataclass(frozen=True)
class Composition:
    """Occurrence counts of each alphabet level in an n-sequence."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ConfigError(f"negative count in composition {self.counts}")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def n(self) -> int:
        return sum(self.counts)

    def pmf(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.n

    def energy(self, alph: AmplitudeAlphabet) -> int:
        """Total sequence energy sum(n_j * a_j^2); identical for every permutation."""
        return sum(c * a * a for c, a in zip(self.counts, alph.levels))

    def of_sequence(self) -> "Composition":  # pragma: no cover - convenience alias
        return self

    @classmethod
    def from_sequence(cls, seq, alph: AmplitudeAlphabet) -> "Composition":
        counts = [0] * alph.n_a
        for a in seq:
            counts[alph.index_of(int(a))] += 1
        return cls(tuple(counts))


def multinomial(comp: Composition) -> int:
    """Number of distinct permutations n! / prod(n_j!), exact."""
    out = math.factorial(comp.n)
    for c in comp.counts:
        out //= math.factorial(c)
    return out


def entropy(p) -> float:
    """Entropy in bits with the 0*log0 := 0 convention."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def avg_energy(p, alph: AmplitudeAlphabet) -> float:
    """Average energy per symbol sum_a p(a) a^2."""
    p = np.asarray(p, dtype=float)
    if p.shape != (alph.n_a,):
        raise ConfigError(f"pmf length {p.shape} does not match alphabet size {alph.n_a}")
    return float(np.sum(p * alph.level_array() ** 2))


def mb_pmf(alph: AmplitudeAlphabet, lam: float) -> np.ndarray:
    """Maxwell-Boltzmann pmf K(lambda) exp(-lambda a^2) over the alphabet."""
    a2 = alph.level_array() ** 2
    w = np.exp(-lam * (a2 - a2[0]))  # shift by a_min^2 for numerical range
    return w / w.sum()


@dataclass(frozen=True)
class MBDistribution:
    """A Maxwell-Boltzmann amplitude distribution and its rate parameter."""

    alph: AmplitudeAlphabet
    lam: float

    @property
    def normalizer(self) -> float:
        a2 = self.alph.level_array() ** 2
        return float(1.0 / np.sum(np.exp(-self.lam * a2)))

    @property
    def pmf(self) -> np.ndarray:
        return mb_pmf(self.alph, self.lam)

    @property
    def entropy(self) -> float:
        return entropy(self.pmf)

    @property
    def energy(self) -> float:
        return avg_energy(self.pmf, self.alph)


def mb_from_entropy(alph: AmplitudeAlphabet, h_target: float, tol: float = 1e-9) -> MBDistribution:
    """Find the MB distribution with the requested entropy.

    Entropy is strictly decreasing in lambda (from log2 n_a at lambda=0),
    so plain bisection on [0, LAMBDA_MAX] converges; the result is within
    ``tol`` bits of ``h_target``.
    """
    hmax = math.log2(alph.n_a)
    if not 0.0 < h_target <= hmax:
        raise ConfigError(f"entropy target {h_target} outside (0, {hmax}]")
    if h_target == hmax:
        return MBDistribution(alph, 0.0)
    lo, hi = 0.0, LAMBDA_MAX
    if entropy(mb_pmf(alph, hi)) > h_target:
        raise ConfigError(f"entropy target {h_target} below bracket minimum")
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if entropy(mb_pmf(alph, mid)) > h_target:
            lo = mid
        else:
            hi = mid
        if abs(entropy(mb_pmf(alph, 0.5 * (lo + hi))) - h_target) <= tol and hi - lo < 1e-12:
            break
    return MBDistribution(alph, 0.5 * (lo + hi))


def optimize_mb(alph: AmplitudeAlphabet, snr_db: float, rate_metric: str = "RBMD") -> MBDistribution:
    """MB distribution maximizing an achievable-rate metric at the given SNR.

    ``rate_metric`` is ``"RBMD"`` (bit-metric decoding rate) or ``"MI"``
    (symbol-wise mutual information).  Golden-section search over
    lambda in [0, LAMBDA_MAX]; deterministic.
    """
    from . import metrics  # deferred: metrics imports this module
    from .labeling import BrgcLabeling

    lab = BrgcLabeling(alph.m)
    if rate_metric.upper() == "RBMD":
        score = lambda pa: metrics.rbmd(metrics.symbol_pmf(pa), snr_db, lab)
    elif rate_metric.upper() == "MI":
        score = lambda pa: metrics.mutual_information(metrics.symbol_pmf(pa), snr_db, lab)
    else:
        raise ConfigError(f"unknown rate metric {rate_metric!r}")

    invphi = (math.sqrt(5) - 1) / 2
    lo, hi = 0.0, LAMBDA_MAX
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = score(mb_pmf(alph, x1))
    f2 = score(mb_pmf(alph, x2))
    while hi - lo > 1e-4:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = score(mb_pmf(alph, x2))
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = score(mb_pmf(alph, x1))
    return MBDistribution(alph, 0.5 * (lo + hi))


def quantize_pmf(p, n: int) -> Composition:
    """n-type composition minimizing D(C/n || p), ties to lexicographically smallest counts.

    Marginal allocation: distribute the n units one at a time, always to the
    component with the smallest increment of sum_j c_j log2(c_j / (n p_j)).
    The objective is separable and convex in the counts, so this greedy is
    exactly optimal; verified against exhaustive search at small n in the
    test suite.
    """
    p = np.asarray(p, dtype=float)
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    counts = [0] * len(p)

    def increment(j):
        # delta of c*log2(c) - c*log2(n p_j) when counts[j] -> counts[j]+1
        if p[j] <= 0.0:
            return math.inf
        c = counts[j]
        grow = (c + 1) * math.log2(c + 1) - (c * math.log2(c) if c else 0.0)
        return grow - math.log2(n * p[j])

    for _ in range(n):
        deltas = [increment(j) for j in range(len(p))]
        best = min(deltas)
        # on ties prefer the largest index: keeps earlier counts small,
        # i.e. the lexicographically smallest counts vector
        j = max(j for j, d in enumerate(deltas) if d == best)
        counts[j] += 1
    return Composition(tuple(counts))


def kl_divergence(q, p) -> float:
    """D(q || p) in bits; infinite if q puts mass where p has none."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    out = 0.0
    for qj, pj in zip(q, p):
        if qj > 0:
            if pj <= 0:
                return math.inf
            out += qj * math.log2(qj / pj)
    return out


def pmf_as_fractions(comp: Composition) -> tuple[Fraction, ...]:
    """Exact n-type pmf of a composition, for rational bookkeeping."""
    n = comp.n
    return tuple(Fraction(c, n) for c in comp.counts)
