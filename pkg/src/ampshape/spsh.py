"""Sphere shaping: index every amplitude sequence inside an n-sphere.

Two orderings of the same sequence set are implemented:

* ESS - lexicographic.  An (n+1) x L trellis holds, for each (position,
  accumulated energy) state, the number of ways to finish the sequence
  without leaving the sphere.  Encoding walks the trellis once per symbol.

* SM - energy-major (shell by shell).  The blocklength is halved
  recursively; for every length in the halving tree a table of
  exact-energy sequence counts is kept, and an index inside a shell is
  split into (left-half energy block, left index, right index).

Possible sequence energies are {n, n+8, ..., e_max} because odd squares are
1 mod 8, so energies are indexed by shell number l = (e - n)/8 throughout
and both structures store L = (e_max - n)/8 + 1 columns.

Counts are exact Python ints in full precision ("fp").  Bounded precision
("bp") rounds every stored count down to an n_m-bit mantissa right after it
is computed, which shrinks the codebook slightly but keeps the index maps
invertible because encoder and decoder read the same rounded counts.

Structures are immutable after build (a lazily filled occurrence-count memo
on SM tables is the only internal cache); encode/decode are pure, so one
shared structure can serve any number of workers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import AmplitudeAlphabet, BitWord, Composition
from .errors import ConfigError, EnergyOverflow, RankOverflow

__all__ = [
    "BoundedNumber",
    "EssTrellis",
    "SmTables",
    "num_shells",
    "admissible_e_max",
    "min_radius",
    "build_ess_trellis",
    "ess_encode",
    "ess_decode",
    "build_sm_tables",
    "sm_encode",
    "sm_decode",
    "induced_pmf",
    "choose_mantissa_bits",
    "save_structure",
    "load_structure",
]


# ---------------------------------------------------------------------------
# shells and bounded precision

def admissible_e_max(n: int, e_max: int) -> int:
    """Largest admissible energy <= e_max (energies are n + 8l)."""
    if e_max < n:
        raise ConfigError(f"e_max={e_max} below the minimum sequence energy n={n}")
    return n + 8 * ((e_max - n) // 8)


def num_shells(n: int, e_max: int) -> int:
    """Number of occupied shells L = floor((e_max - n)/8) + 1."""
    if e_max < n:
        raise ConfigError(f"e_max={e_max} below the minimum sequence energy n={n}")
    return (e_max - n) // 8 + 1


def round_down_mantissa(x: int, n_m: int) -> int:
    """Round a nonnegative int down to an n_m-bit mantissa (never rounds up)."""
    shift = x.bit_length() - n_m
    if shift <= 0:
        return x
    return (x >> shift) << shift


@dataclass(frozen=True)
class BoundedNumber:
    """Mantissa/exponent view m * 2^p of a bounded-precision count."""

    mantissa: int
    exponent: int

    @classmethod
    def from_int(cls, x: int, n_m: int) -> "BoundedNumber":
        shift = max(x.bit_length() - n_m, 0)
        return cls(x >> shift, shift)

    def to_int(self) -> int:
        return self.mantissa << self.exponent


def _check_exponent_range(values, n_m: int, n_p: int):
    worst = max((v.bit_length() - n_m for v in values), default=0)
    if worst > (1 << n_p) - 1:
        raise ConfigError(f"exponent {worst} does not fit in n_p={n_p} bits")


# ---------------------------------------------------------------------------
# ESS trellis

class EssTrellis:
    """Completion-count trellis for lexicographic sphere shaping.

    ``rows[j][l]`` is the number of ways to extend a prefix of j symbols and
    accumulated energy j + 8l to a full in-sphere sequence; ``rows[0][0]`` is
    the codebook size.  ``k`` is the operational input length, by default
    floor(log2 size), and may be forced lower.
    """

    kind = "ess"

    def __init__(self, alph, n, e_max, rows, precision="fp", k=None):
        self.alph = alph
        self.n = n
        self.e_max = e_max
        self.L = num_shells(n, e_max)
        self.rows = rows
        self.precision = precision
        self.deltas = tuple((a * a - 1) // 8 for a in alph.levels)
        kmax = rows[0][0].bit_length() - 1
        if k is None:
            k = kmax
        elif k > kmax:
            raise ConfigError(f"k={k} exceeds floor(log2 size)={kmax}")
        self.k = k

    @property
    def size(self) -> int:
        return self.rows[0][0]

    def with_k(self, k: int) -> "EssTrellis":
        return EssTrellis(self.alph, self.n, self.e_max, self.rows, self.precision, k)


def build_ess_trellis(n: int, alph: AmplitudeAlphabet, e_max: int, precision: str = "fp") -> EssTrellis:
    """Build the (n+1) x L trellis; ``precision`` is "fp" or "bp:<n_m>,<n_p>"."""
    e_max = admissible_e_max(n, e_max)
    L = num_shells(n, e_max)
    deltas = [(a * a - 1) // 8 for a in alph.levels]
    n_m = _parse_precision(precision)
    rows = [None] * (n + 1)
    rows[n] = tuple([1] * L)
    for j in range(n - 1, -1, -1):
        nxt = rows[j + 1]
        row = []
        for l in range(L):
            s = 0
            for d in deltas:
                l2 = l + d
                if l2 < L:
                    s += nxt[l2]
            if n_m:
                s = round_down_mantissa(s, n_m)
            row.append(s)
        rows[j] = tuple(row)
    if n_m:
        _, n_p = _split_precision(precision)
        _check_exponent_range([rows[0][0]], n_m, n_p)
    return EssTrellis(alph, n, e_max, tuple(rows), precision)


def _parse_precision(precision: str) -> int:
    """Mantissa bit count, or 0 for full precision."""
    if precision == "fp":
        return 0
    n_m, _ = _split_precision(precision)
    return n_m


def _split_precision(precision: str) -> tuple[int, int]:
    try:
        body = precision.split(":", 1)[1]
        n_m, n_p = (int(x) for x in body.split(","))
    except (IndexError, ValueError):
        raise ConfigError(f"precision must be 'fp' or 'bp:<n_m>,<n_p>', got {precision!r}") from None
    if n_m < 2 or n_p < 1:
        raise ConfigError(f"invalid bounded-precision parameters ({n_m},{n_p})")
    return n_m, n_p


def min_radius(n: int, alph: AmplitudeAlphabet, k: int, hint_e_max: int | None = None) -> int:
    """Smallest admissible e_max whose sphere holds at least 2^k sequences."""
    if k < 0:
        raise ConfigError("k must be nonnegative")
    if k > n * np.log2(alph.n_a) + 1e-9:
        raise ConfigError(f"k={k} not achievable: alphabet supports at most {n * np.log2(alph.n_a):.2f} bits")
    target = 1 << k

    def count(L):
        return build_ess_trellis(n, alph, n + 8 * (L - 1), "fp").size

    l_cap = n * (alph.levels[-1] ** 2 - 1) // 8 + 1
    if hint_e_max is not None:
        hi = min(num_shells(n, max(hint_e_max, n)) + 2, l_cap)
    else:
        hi = 1
    while count(hi) < target:
        if hi >= l_cap:
            raise ConfigError(f"k={k} not achievable within the full lattice")
        hi = min(2 * hi + 1, l_cap)
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if count(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    return n + 8 * (lo - 1)


def _ess_unrank(trellis: EssTrellis, rank: int) -> list[int]:
    rows = trellis.rows
    levels = trellis.alph.levels
    deltas = trellis.deltas
    L = trellis.L
    out = []
    l = 0
    for j in range(trellis.n):
        nxt = rows[j + 1]
        for a, d in zip(levels, deltas):
            l2 = l + d
            c = nxt[l2] if l2 < L else 0
            if rank < c:
                out.append(a)
                l = l2
                break
            rank -= c
        else:  # pragma: no cover - impossible for rank < size
            raise RankOverflow("rank exceeded trellis count")
    return out


def ess_encode(word: BitWord, trellis: EssTrellis) -> list[int]:
    """Unrank ``word`` into the sequence with that lexicographic index."""
    if word.length != trellis.k:
        raise ConfigError(f"word length {word.length} != trellis k {trellis.k}")
    return _ess_unrank(trellis, word.value)


def ess_decode(seq, trellis: EssTrellis) -> BitWord:
    """Rank an in-sphere sequence; inverse of :func:`ess_encode`."""
    rows = trellis.rows
    levels = trellis.alph.levels
    deltas = trellis.deltas
    L = trellis.L
    alph = trellis.alph
    if len(seq) != trellis.n:
        raise ConfigError(f"sequence length {len(seq)} != n {trellis.n}")
    rank = 0
    l = 0
    for j, a in enumerate(seq):
        idx = alph.index_of(int(a))
        nxt = rows[j + 1]
        for d in deltas[:idx]:
            l2 = l + d
            if l2 < L:
                rank += nxt[l2]
        l += deltas[idx]
        if l >= L:
            raise EnergyOverflow(f"sequence energy exceeds e_max={trellis.e_max}")
    if rank >= (1 << trellis.k):
        raise RankOverflow(f"sequence rank {rank} >= 2^{trellis.k}")
    return BitWord(rank, trellis.k)


# ---------------------------------------------------------------------------
# Shell mapping

def _halving_lengths(n: int) -> list[int]:
    """Distinct lengths appearing in the halving tree of n (at most two per level)."""
    seen = set()
    frontier = {n}
    while frontier:
        seen |= frontier
        frontier = {x for l in frontier if l > 1 for x in (l // 2, l - l // 2)} - seen
    return sorted(seen)


class SmTables:
    """Exact-energy sequence counts for every length in the halving tree.

    ``g[l][t]`` counts length-l sequences of energy l + 8t, truncated at the
    sphere budget (t < L).  Shell-major ordering: sequences are sorted by
    total energy, and inside a shell recursively by (left-half energy,
    left-half index, right-half index) with the left half of length
    floor(l/2).
    """

    kind = "sm"

    def __init__(self, alph, n, e_max, g, precision="fp", k=None):
        self.alph = alph
        self.n = n
        self.e_max = e_max
        self.L = num_shells(n, e_max)
        self.g = g
        self.precision = precision
        self._size = sum(g[n])
        self._cum = None
        self._occ_memo = {}
        kmax = self._size.bit_length() - 1
        if k is None:
            k = kmax
        elif k > kmax:
            raise ConfigError(f"k={k} exceeds floor(log2 size)={kmax}")
        self.k = k

    @property
    def size(self) -> int:
        """Codebook size; the cumulative over shells of the stored counts."""
        return self._size

    def with_k(self, k: int) -> "SmTables":
        t = SmTables(self.alph, self.n, self.e_max, self.g, self.precision, k)
        t._occ_memo = self._occ_memo
        return t

    def shell_cumulative(self) -> list[int]:
        # cum[t] = number of sequences on shells < t
        if self._cum is None:
            cum = [0]
            for v in self.g[self.n]:
                cum.append(cum[-1] + v)
            self._cum = cum
        return self._cum

    def split(self, length: int) -> tuple[int, int]:
        return length // 2, length - length // 2


def build_sm_tables(n: int, alph: AmplitudeAlphabet, e_max: int, precision: str = "fp") -> SmTables:
    e_max = admissible_e_max(n, e_max)
    L = num_shells(n, e_max)
    n_m = _parse_precision(precision)
    deltas = {(a * a - 1) // 8 for a in alph.levels}
    g = {1: tuple(1 if t in deltas else 0 for t in range(L))}
    for length in _halving_lengths(n):
        if length == 1:
            continue
        l1, l2 = length // 2, length - length // 2
        g1, g2 = g[l1], g[l2]
        row = []
        for t in range(L):
            s = 0
            for t1 in range(t + 1):
                a = g1[t1]
                if a:
                    b = g2[t - t1]
                    if b:
                        s += a * b
            if n_m:
                s = round_down_mantissa(s, n_m)
            row.append(s)
        g[length] = tuple(row)
    if n_m:
        _, n_p = _split_precision(precision)
        _check_exponent_range(g[n], n_m, n_p)
    return SmTables(alph, n, e_max, g, precision)


def _sm_unrank_class(tables: SmTables, length: int, t: int, rank: int) -> list[int]:
    if length == 1:
        for a in tables.alph.levels:
            if (a * a - 1) // 8 == t:
                return [a]
        raise ConfigError(f"no amplitude with energy {1 + 8 * t}")  # pragma: no cover
    l1, l2 = tables.split(length)
    g1, g2 = tables.g[l1], tables.g[l2]
    for t1 in range(t + 1):
        a = g1[t1]
        if not a:
            continue
        b = g2[t - t1]
        if not b:
            continue
        block = a * b
        if rank < block:
            i1, i2 = divmod(rank, b)
            return _sm_unrank_class(tables, l1, t1, i1) + _sm_unrank_class(tables, l2, t - t1, i2)
        rank -= block
    raise RankOverflow("rank exceeded class count")  # pragma: no cover


def _sm_rank_class(tables: SmTables, seq, length: int, t: int) -> int:
    if length == 1:
        return 0
    l1, l2 = tables.split(length)
    g1, g2 = tables.g[l1], tables.g[l2]
    left, right = seq[:l1], seq[l1:]
    e1 = sum(int(a) * int(a) for a in left)
    t1 = (e1 - l1) // 8
    rank = 0
    for tt in range(t1):
        a = g1[tt]
        if a:
            b = g2[t - tt]
            if b:
                rank += a * b
    b = g2[t - t1]
    r1 = _sm_rank_class(tables, left, l1, t1)
    r2 = _sm_rank_class(tables, right, l2, t - t1)
    if r1 >= g1[t1] or r2 >= b:
        # sequence addressed beyond the (possibly rounded-down) stored counts
        raise RankOverflow("sequence beyond stored class count")
    return rank + r1 * b + r2


def sm_encode(word: BitWord, tables: SmTables) -> list[int]:
    """Unrank ``word`` in energy-major order: shell first, then within shell."""
    if word.length != tables.k:
        raise ConfigError(f"word length {word.length} != tables k {tables.k}")
    rank = word.value
    cum = tables.shell_cumulative()
    gn = tables.g[tables.n]
    for t in range(tables.L):
        if rank < cum[t + 1]:
            return _sm_unrank_class(tables, tables.n, t, rank - cum[t])
    raise RankOverflow("rank exceeded codebook size")  # pragma: no cover


def sm_decode(seq, tables: SmTables) -> BitWord:
    seq = [int(a) for a in seq]
    if len(seq) != tables.n:
        raise ConfigError(f"sequence length {len(seq)} != n {tables.n}")
    for a in seq:
        tables.alph.index_of(a)
    e = sum(a * a for a in seq)
    if e > tables.e_max:
        raise EnergyOverflow(f"sequence energy {e} > e_max {tables.e_max}")
    t = (e - tables.n) // 8
    rank = tables.shell_cumulative()[t] + _sm_rank_class(tables, seq, tables.n, t)
    if rank >= (1 << tables.k):
        raise RankOverflow(f"sequence rank {rank} >= 2^{tables.k}")
    return BitWord(rank, tables.k)


# ---------------------------------------------------------------------------
# induced distribution of the first 2^k sequences

def induced_pmf(structure, k: int | None = None) -> tuple[np.ndarray, float]:
    """Per-position amplitude distribution over the 2^k addressed sequences.

    Exact trellis/table counting, no enumeration.  Returns (pmf, average
    energy per symbol).  For ESS the unused tail is the end of the
    lexicographic list; for SM it is the highest-energy tail.
    """
    if k is None:
        k = structure.k
    if structure.kind == "ess":
        occ, total = _ess_occurrences(structure, 1 << k)
    else:
        occ, total = _sm_occurrences(structure, 1 << k)
    n = structure.n
    pmf_exact = [Fraction(o, total * n) for o in occ]
    pmf = np.array([float(x) for x in pmf_exact])
    energy = sum(f * a * a for f, a in zip(pmf_exact, structure.alph.levels))
    return pmf, float(energy)


def _ess_occurrences(trellis: EssTrellis, use: int):
    """Total occurrences of each amplitude over the ``use`` first sequences."""
    n, L = trellis.n, trellis.L
    rows, deltas = trellis.rows, trellis.deltas
    n_a = trellis.alph.n_a
    levels = trellis.alph.levels
    if not 1 <= use <= trellis.size:
        raise ConfigError(f"need 1 <= 2^k <= codebook size, got {use}")
    occ = [0] * n_a
    boundary = _ess_unrank(trellis, use) if use < trellis.size else None

    if boundary is None:
        fw = [0] * L
        fw[0] = 1
        for j in range(n):
            nxt = rows[j + 1]
            nf = [0] * L
            for l in range(L):
                f = fw[l]
                if not f:
                    continue
                for ai in range(n_a):
                    l2 = l + deltas[ai]
                    if l2 < L:
                        occ[ai] += f * nxt[l2]
                        nf[l2] += f
            fw = nf
        return occ, trellis.size

    # the used set is everything lexicographically below the boundary
    # sequence; count edges from "already deviated below" prefixes (free)
    # plus the deviation and continuation edges of the still-equal prefix
    bidx = [trellis.alph.index_of(a) for a in boundary]
    dev = []  # sequences branching below the boundary at each position
    l = 0
    for j in range(n):
        nxt = rows[j + 1]
        s = 0
        for ai in range(bidx[j]):
            l2 = l + deltas[ai]
            if l2 < L:
                s += nxt[l2]
        dev.append(s)
        l += deltas[bidx[j]]
    tail = [0] * (n + 1)
    for j in range(n - 1, -1, -1):
        tail[j] = tail[j + 1] + dev[j]
    assert tail[0] == use

    fw = [0] * L
    l = 0
    for j in range(n):
        nxt = rows[j + 1]
        nf = [0] * L
        for ll in range(L):
            f = fw[ll]
            if not f:
                continue
            for ai in range(n_a):
                l2 = ll + deltas[ai]
                if l2 < L:
                    occ[ai] += f * nxt[l2]
                    nf[l2] += f
        for ai in range(bidx[j]):
            l2 = l + deltas[ai]
            if l2 < L:
                occ[ai] += nxt[l2]
                nf[l2] += 1
        occ[bidx[j]] += tail[j + 1]
        l += deltas[bidx[j]]
        fw = nf
    return occ, use


def _sm_block_prefix_occ(tables: SmTables, length: int, t: int, r: int):
    """Occurrences over the first r addressed sequences of class (length, t).

    "Addressed" respects the stored (possibly rounded-down) counts: a full
    sub-block covers the g1[t1] x g2[t2] addressed halves only, exactly as
    the unranking walks them.
    """
    n_a = tables.alph.n_a
    occ = [0] * n_a
    l1, l2 = tables.split(length)
    g1, g2 = tables.g[l1], tables.g[l2]
    for t1 in range(t + 1):
        a = g1[t1]
        if not a:
            continue
        b = g2[t - t1]
        if not b:
            continue
        block = a * b
        if r >= block:
            o1 = _sm_class_occ(tables, l1, t1)
            o2 = _sm_class_occ(tables, l2, t - t1)
            for ai in range(n_a):
                occ[ai] += o1[ai] * b + a * o2[ai]
            r -= block
            if r == 0:
                break
            continue
        i1, i2 = divmod(r, b)
        left_full = _sm_prefix_occ(tables, l1, t1, i1)
        o2 = _sm_class_occ(tables, l2, t - t1)
        for ai in range(n_a):
            occ[ai] += left_full[ai] * b + i1 * o2[ai]
        if i2:
            row_seq = _sm_unrank_class(tables, l1, t1, i1)
            for a_val in row_seq:
                occ[tables.alph.index_of(a_val)] += i2
            right = _sm_prefix_occ(tables, l2, t - t1, i2)
            for ai in range(n_a):
                occ[ai] += right[ai]
        break
    return tuple(occ)


def _sm_class_occ(tables: SmTables, length: int, t: int):
    """Occurrences over all g[length][t] addressed sequences of a class."""
    memo = tables._occ_memo
    key = (length, t)
    got = memo.get(key)
    if got is not None:
        return got
    if length == 1:
        occ = tuple(1 if (a * a - 1) // 8 == t and tables.g[1][t] else 0 for a in tables.alph.levels)
    else:
        occ = _sm_block_prefix_occ(tables, length, t, tables.g[length][t])
    memo[key] = occ
    return occ


def _sm_prefix_occ(tables: SmTables, length: int, t: int, r: int):
    """Occurrences over the first r addressed sequences of class (length, t)."""
    if r == 0:
        return (0,) * tables.alph.n_a
    if r >= tables.g[length][t]:
        return _sm_class_occ(tables, length, t)
    return _sm_block_prefix_occ(tables, length, t, r)


def _sm_occurrences(tables: SmTables, use: int):
    if not 1 <= use <= tables.size:
        raise ConfigError(f"need 1 <= 2^k <= codebook size, got {use}")
    cum = tables.shell_cumulative()
    n_a = tables.alph.n_a
    # boundary shell: full shells below it form a smaller sphere
    t_star = 0
    while cum[t_star + 1] < use:
        t_star += 1
    occ = [0] * n_a
    if t_star > 0:
        inner = build_ess_trellis(tables.n, tables.alph, tables.n + 8 * (t_star - 1), "fp")
        if tables.precision == "fp":
            full, _ = _ess_occurrences(inner, inner.size)
            for ai in range(n_a):
                occ[ai] += full[ai]
        else:
            # rounded shell counts differ from the true sphere content;
            # accumulate per-shell class counts instead
            for t in range(t_star):
                if tables.g[tables.n][t]:
                    o = _sm_class_occ(tables, tables.n, t)
                    for ai in range(n_a):
                        occ[ai] += o[ai]
    partial = use - cum[t_star]
    if partial:
        o = _sm_prefix_occ(tables, tables.n, t_star, partial)
        for ai in range(n_a):
            occ[ai] += o[ai]
    return occ, use


# ---------------------------------------------------------------------------
# bounded-precision parameter selection

def choose_mantissa_bits(n: int, alph: AmplitudeAlphabet, e_max: int, kind: str = "ess") -> tuple[int, int]:
    """Smallest n_m whose rounded structure still addresses 2^k_fp sequences.

    Returns (n_m, n_p) with n_p = ceil(log2(ceil(n Rs) - n_m)).
    """
    build = build_ess_trellis if kind == "ess" else build_sm_tables
    full = build(n, alph, e_max, "fp")
    k_fp = full.size.bit_length() - 1
    bits_fp = int(np.ceil(np.log2(float(full.size)))) if full.size > 1 else 1
    for n_m in range(2, bits_fp + 1):
        n_p = max(int(np.ceil(np.log2(max(bits_fp - n_m, 1)))), 1)
        bp = build(n, alph, e_max, f"bp:{n_m},{n_p}")
        if bp.size >= (1 << k_fp):
            return n_m, n_p
    return bits_fp, 1  # pragma: no cover - fp-width mantissa never rounds


# ---------------------------------------------------------------------------
# binary container (little-endian, versioned)

_MAGIC = b"AMPS"
_VERSION = 1


def _pack_count(x: int) -> bytes:
    raw = x.to_bytes((x.bit_length() + 7) // 8 or 1, "little")
    return struct.pack("<I", len(raw)) + raw


def _unpack_count(buf: memoryview, off: int) -> tuple[int, int]:
    (ln,) = struct.unpack_from("<I", buf, off)
    off += 4
    return int.from_bytes(bytes(buf[off:off + ln]), "little"), off + ln


def save_structure(structure, path: str):
    """Persist a trellis or SM table set; layout documented in the README."""
    kind = 1 if structure.kind == "ess" else 2
    if structure.precision == "fp":
        prec, n_m, n_p = 0, 0, 0
    else:
        n_m, n_p = _split_precision(structure.precision)
        prec = 1
    head = struct.pack(
        "<4sHBBIQBBBII",
        _MAGIC, _VERSION, kind, structure.alph.m, structure.n, structure.e_max,
        prec, n_m, n_p, structure.k, structure.L,
    )
    chunks = [head]
    if kind == 1:
        for row in structure.rows:
            for v in row:
                chunks.append(_pack_count(v))
    else:
        lengths = sorted(structure.g)
        chunks.append(struct.pack("<I", len(lengths)))
        for length in lengths:
            chunks.append(struct.pack("<I", length))
            for v in structure.g[length]:
                chunks.append(_pack_count(v))
    with open(path, "wb") as f:
        f.write(b"".join(chunks))


def load_structure(path: str):
    with open(path, "rb") as f:
        buf = memoryview(f.read())
    magic, version, kind, m, n, e_max, prec, n_m, n_p, k, L = struct.unpack_from("<4sHBBIQBBBII", buf, 0)
    if magic != _MAGIC or version != _VERSION:
        raise ConfigError(f"not an ampshape container (magic={magic!r}, version={version})")
    off = struct.calcsize("<4sHBBIQBBBII")
    alph = AmplitudeAlphabet(m)
    precision = "fp" if prec == 0 else f"bp:{n_m},{n_p}"
    if kind == 1:
        rows = []
        for _ in range(n + 1):
            row = []
            for _ in range(L):
                v, off = _unpack_count(buf, off)
                row.append(v)
            rows.append(tuple(row))
        return EssTrellis(alph, n, e_max, tuple(rows), precision, k)
    (nlen,) = struct.unpack_from("<I", buf, off)
    off += 4
    g = {}
    for _ in range(nlen):
        (length,) = struct.unpack_from("<I", buf, off)
        off += 4
        row = []
        for _ in range(L):
            v, off = _unpack_count(buf, off)
            row.append(v)
        g[length] = tuple(row)
    return SmTables(alph, n, e_max, g, precision, k)
