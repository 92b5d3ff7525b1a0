"""Constant-composition distribution matcher.

A codebook is the set of all permutations of one base composition C; the
matcher is the bijection between k-bit words (k = floor(log2 MC(C))) and
the 2^k lexicographically smallest permutations.  Ranks are computed with
exact big-integer arithmetic: the number of completions after fixing a
prefix is a residual multinomial coefficient, updated incrementally with
one multiply/divide per step instead of recomputing factorials.

Also provides subset ranking (SR) for binary sequences: the combinatorial
number system over the positions of the set bits, the binary-output matcher
variant used as a low-serialism alternative.

Codebooks are immutable; encode/decode are pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import AmplitudeAlphabet, BitWord, Composition, multinomial
from .errors import CompositionMismatch, ConfigError, RankOverflow

__all__ = ["CcdmCodebook", "ccdm_encode", "ccdm_decode", "sr_rank", "sr_unrank"]


@dataclass(frozen=True)
class CcdmCodebook:
    """Fixed-composition shaping codebook over ``alph``.

    ``k`` defaults to floor(log2(size)) but may be forced lower, in which
    case only the first 2^k permutations are addressable (used when a
    transmission chain pins the shaper input length).
    """

    alph: AmplitudeAlphabet
    composition: Composition
    k: int = field(default=-1)

    def __post_init__(self):
        if len(self.composition.counts) != self.alph.n_a:
            raise ConfigError("composition length does not match alphabet size")
        kmax = multinomial(self.composition).bit_length() - 1
        if self.k < 0:
            object.__setattr__(self, "k", kmax)
        elif self.k > kmax:
            raise ConfigError(f"k={self.k} exceeds floor(log2 MC)={kmax}")

    @property
    def size(self) -> int:
        """Number of sequences in the full permutation set, MC(C)."""
        return multinomial(self.composition)

    @property
    def n(self) -> int:
        return self.composition.n

    @property
    def sequence_energy(self) -> int:
        return self.composition.energy(self.alph)

    def induced_pmf(self):
        return self.composition.pmf()


def ccdm_encode(word: BitWord, cb: CcdmCodebook) -> list[int]:
    """Map a k-bit word to the permutation of C with that lexicographic rank."""
    if word.length != cb.k:
        raise ConfigError(f"word length {word.length} != codebook k {cb.k}")
    rank = word.value
    counts = list(cb.composition.counts)
    levels = cb.alph.levels
    remaining = cb.n
    total = cb.size  # completions with the current residual composition
    out = []
    for _ in range(cb.n):
        for j, cj in enumerate(counts):
            if cj == 0:
                continue
            # completions if level j is placed here: MC drops by factor c_j / remaining
            sub = total * cj // remaining
            if rank < sub:
                out.append(levels[j])
                counts[j] -= 1
                total = sub
                break
            rank -= sub
        else:  # pragma: no cover - impossible for rank < size
            raise RankOverflow("rank exceeded codebook size")
        remaining -= 1
    return out


def ccdm_decode(seq, cb: CcdmCodebook) -> BitWord:
    """Exact inverse of :func:`ccdm_encode`.

    Raises CompositionMismatch if the sequence is not a permutation of C and
    RankOverflow if it is one of the unused permutations with rank >= 2^k.
    """
    seq = [int(a) for a in seq]
    if Composition.from_sequence(seq, cb.alph) != cb.composition:
        raise CompositionMismatch(
            f"sequence composition {Composition.from_sequence(seq, cb.alph).counts} "
            f"!= codebook composition {cb.composition.counts}"
        )
    counts = list(cb.composition.counts)
    remaining = cb.n
    total = cb.size
    rank = 0
    for a in seq:
        target = cb.alph.index_of(a)
        for j in range(target):
            if counts[j]:
                rank += total * counts[j] // remaining
        total = total * counts[target] // remaining
        counts[target] -= 1
        remaining -= 1
    if rank >= (1 << cb.k):
        raise RankOverflow(f"sequence rank {rank} >= 2^{cb.k}")
    return BitWord(rank, cb.k)


def sr_rank(bits) -> tuple[int, int, int]:
    """Rank a binary sequence among all with the same weight.

    Returns (rank, n, n_1).  Ordering follows the lexicographic order of the
    set-bit position subsets (combinatorial number system), i.e. sequences
    with earlier ones rank lower.
    """
    bits = [int(b) & 1 for b in bits]
    n = len(bits)
    n1 = sum(bits)
    rank = 0
    remaining = n1
    for pos, b in enumerate(bits):
        if remaining == 0:
            break
        if b:
            remaining -= 1
        else:
            rank += math.comb(n - pos - 1, remaining - 1)
    return rank, n, n1


def sr_unrank(index: int, n: int, n1: int) -> list[int]:
    """Inverse of :func:`sr_rank`."""
    if n1 > n:
        raise ConfigError(f"n_1={n1} > n={n}")
    if not 0 <= index < math.comb(n, n1):
        raise RankOverflow(f"index {index} outside [0, C({n},{n1}))")
    bits = [0] * n
    remaining = n1
    for pos in range(n):
        if remaining == 0:
            break
        here = math.comb(n - pos - 1, remaining - 1)
        if index < here:
            bits[pos] = 1
            remaining -= 1
        else:
            index -= here
    return bits
