"""Multiset-partition distribution matcher.

Lifts the constant-composition constraint: the codebook is the union of
power-of-two sized slices of several compositions that come in complementary
pairs (C', 2C - C'), so the ensemble average over all addressed sequences is
the target composition C exactly.  A complete prefix-free code selects the
composition; the payload is ranked inside it with the CCDM machinery.

Construction is deterministic:

1. enumerate every composition C' of n with 0 <= C'_j <= 2 C_j whose
   complement is also valid (vectorized; pair capacities from log-gamma with
   an exact big-integer fallback near floor boundaries);
2. pair capacity b = min over the pair of floor(log2 MC(.)), both members
   used with the same payload length so the pair average stays C;
3. k = floor(log2 sum_i 2^{b_i});
4. fill the 2^k budget greedily in descending-capacity order, reducing the
   payload of the boundary pair so the Kraft sum hits 2^k exactly;
5. canonical prefix code assigned in (descending payload, lexicographic
   composition) order, which makes each leaf own one contiguous range of
   input integers.

Codebooks are immutable after build; encode/decode are pure.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .ccdm import CcdmCodebook, ccdm_decode, ccdm_encode
from .core import AmplitudeAlphabet, BitWord, Composition, avg_energy, entropy, multinomial
from .errors import ConfigError, RankOverflow, UnknownComposition

__all__ = ["MpdmLeaf", "MpdmCodebook", "build_mpdm", "mpdm_encode", "mpdm_decode", "mpdm_stats"]

# refuse enumerations beyond this many candidate compositions (memory guard)
_MAX_CANDIDATES = 50_000_000


@dataclass(frozen=True)
class MpdmLeaf:
    composition: Composition
    payload_bits: int
    prefix: str  # '0'/'1' string of length k - payload_bits

    @property
    def prefix_value(self) -> int:
        return int(self.prefix, 2) if self.prefix else 0


@dataclass(frozen=True)
class MpdmCodebook:
    alph: AmplitudeAlphabet
    target: Composition
    k: int
    leaves: tuple[MpdmLeaf, ...]

    def __post_init__(self):
        # contiguous input ranges per leaf, in leaf order
        starts = []
        s = 0
        for leaf in self.leaves:
            starts.append(s)
            s += 1 << leaf.payload_bits
        if s != (1 << self.k):
            raise ConfigError(f"leaf sizes sum to {s}, expected 2^{self.k}")
        object.__setattr__(self, "_starts", tuple(starts))
        object.__setattr__(
            self, "_by_comp", {leaf.composition.counts: (i, leaf) for i, leaf in enumerate(self.leaves)}
        )

    @property
    def n(self) -> int:
        return self.target.n

    @property
    def num_compositions(self) -> int:
        return len(self.leaves)

    def leaf_for_word(self, value: int) -> tuple[int, MpdmLeaf]:
        i = bisect.bisect_right(self._starts, value) - 1
        return i, self.leaves[i]

    def leaf_for_composition(self, comp: Composition) -> tuple[int, MpdmLeaf]:
        try:
            return self._by_comp[comp.counts]
        except KeyError:
            raise UnknownComposition(f"composition {comp.counts} is not a codebook leaf") from None

    def to_json(self) -> str:
        doc = {
            "m": self.alph.m,
            "target": list(self.target.counts),
            "k": self.k,
            "leaves": [
                {"composition": list(l.composition.counts), "payload_bits": l.payload_bits, "prefix": l.prefix}
                for l in self.leaves
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MpdmCodebook":
        doc = json.loads(text)
        leaves = tuple(
            MpdmLeaf(Composition(tuple(l["composition"])), l["payload_bits"], l["prefix"]) for l in doc["leaves"]
        )
        return cls(AmplitudeAlphabet(doc["m"]), Composition(tuple(doc["target"])), doc["k"], leaves)


def _enumerate_pairs(target: Composition):
    """All canonical pairs (C', C''=2C-C') of compositions of n.

    Returns integer arrays (comps, partners, selfpair mask).  Canonical means
    C' <=lex C''; a self pair (C'=C) appears once.
    """
    c = np.asarray(target.counts, dtype=np.int64)
    n = int(c.sum())
    bounds = np.minimum(2 * c, n)
    n_a = len(c)
    if n_a < 2:
        comps = np.array([[n]], dtype=np.int64)
        return comps, comps.copy(), np.array([True])
    shape = tuple(int(b) + 1 for b in bounds[:-1])
    if math.prod(shape) > _MAX_CANDIDATES:
        raise ConfigError(
            f"pairwise MPDM enumeration infeasible: {math.prod(shape)} candidate compositions"
        )
    grids = np.indices(shape).reshape(n_a - 1, -1).T
    last = n - grids.sum(axis=1)
    ok = (last >= 0) & (last <= bounds[-1])
    comps = np.concatenate([grids[ok], last[ok, None]], axis=1)
    partners = 2 * c[None, :] - comps
    # canonical filter: keep comps lexicographically <= partner
    cmp = np.zeros(len(comps), dtype=np.int8)
    for j in range(n_a):
        und = cmp == 0
        if not und.any():
            break
        d = comps[und, j] - partners[und, j]
        idx = np.flatnonzero(und)
        cmp[idx[d < 0]] = -1
        cmp[idx[d > 0]] = 1
    keep = cmp <= 0
    return comps[keep], partners[keep], (cmp[keep] == 0)


def _floor_log2_mc(comps: np.ndarray, n: int) -> np.ndarray:
    """floor(log2 MC(C)) for each row, exact.

    Float log-gamma everywhere, with a big-integer recomputation for rows
    whose fractional part sits within 1e-8 of a floor boundary.
    """
    lg2 = (gammaln(n + 1) - gammaln(comps + 1).sum(axis=1)) / math.log(2)
    flo = np.floor(lg2).astype(np.int64)
    frac = lg2 - flo
    risky = np.flatnonzero((frac < 1e-8) | (frac > 1 - 1e-8))
    for i in risky:
        mc = multinomial(Composition(tuple(int(x) for x in comps[i])))
        flo[i] = mc.bit_length() - 1
    return flo


def mpdm_input_length(target: Composition) -> int:
    """k of the pairwise MPDM for this target, without building the codebook."""
    comps, partners, selfpair = _enumerate_pairs(target)
    n = target.n
    b1 = _floor_log2_mc(comps, n)
    b2 = _floor_log2_mc(partners, n)
    b = np.where(selfpair, b1, np.minimum(b1, b2))
    expo = b + np.where(selfpair, 0, 1)
    counts = np.bincount(expo)
    total = sum(int(cnt) << e for e, cnt in enumerate(counts) if cnt)
    return total.bit_length() - 1


def build_mpdm(target: Composition, alph: AmplitudeAlphabet | None = None, k_limit: int | None = None) -> MpdmCodebook:
    """Build the pairwise MPDM codebook for a target composition.

    ``k_limit`` caps the input length below the construction's own k (the
    budget is filled to exactly 2^min(k, k_limit)); used when a transmit
    chain fixes the shaper rate.
    """
    if alph is None:
        alph = AmplitudeAlphabet(int(math.log2(len(target.counts))) + 1)
    if len(target.counts) != alph.n_a:
        raise ConfigError("target length does not match alphabet size")
    n = target.n
    comps, partners, selfpair = _enumerate_pairs(target)
    b1 = _floor_log2_mc(comps, n)
    b2 = _floor_log2_mc(partners, n)
    b = np.where(selfpair, b1, np.minimum(b1, b2))

    expo = b + np.where(selfpair, 0, 1)
    counts = np.bincount(expo)
    total = sum(int(cnt) << e for e, cnt in enumerate(counts) if cnt)
    k = total.bit_length() - 1
    if k_limit is not None:
        if k_limit > k:
            raise ConfigError(f"k_limit={k_limit} exceeds achievable k={k}")
        k = k_limit

    # fill the 2^k budget in descending capacity order (ties: lex-smaller
    # composition first); every pair keeps equal payloads on both members,
    # so discarding or shrinking pairs never moves the ensemble average
    order = np.lexsort(tuple(comps[:, j] for j in range(comps.shape[1] - 1, -1, -1)) + (-b,))
    budget = 1 << k
    chosen = []  # (composition tuple, partner tuple or None, payload)
    for idx in order:
        if budget == 0:
            break
        cap = int(b[idx])
        if selfpair[idx]:
            pay = min(cap, budget.bit_length() - 1)
            take = 1 << pay
            if pay == 0 and budget > 1:
                continue  # a lone odd leaf would strand an odd residue for the even pairs
            chosen.append((tuple(int(x) for x in comps[idx]), None, pay))
        else:
            pay = min(cap, max(budget.bit_length() - 2, 0))
            take = 1 << (pay + 1)
            if take > budget:
                continue
            chosen.append((tuple(int(x) for x in comps[idx]), tuple(int(x) for x in partners[idx]), pay))
        budget -= take
    if budget:
        raise ConfigError(f"could not partition 2^{k} exactly; residual {budget}")

    leaves = []
    for comp, partner, pay in chosen:
        leaves.append([Composition(comp), pay])
        if partner is not None:
            leaves.append([Composition(partner), pay])
    # canonical prefix code in (descending payload, lex composition) order
    leaves.sort(key=lambda lp: (-lp[1], lp[0].counts))
    out = []
    code = 0
    prev_len = None
    for comp, pay in leaves:
        plen = k - pay
        if prev_len is None:
            code = 0
        else:
            code = (code + 1) << (plen - prev_len)
        prev_len = plen
        out.append(MpdmLeaf(comp, pay, format(code, f"0{plen}b") if plen else ""))
    return MpdmCodebook(alph, target, k, tuple(out))


def mpdm_encode(word: BitWord, cb: MpdmCodebook) -> list[int]:
    """Prefix selects the leaf; payload is CCDM-unranked inside it."""
    if word.length != cb.k:
        raise ConfigError(f"word length {word.length} != codebook k {cb.k}")
    i, leaf = cb.leaf_for_word(word.value)
    payload = word.value - cb._starts[i]
    inner = CcdmCodebook(cb.alph, leaf.composition, leaf.payload_bits)
    return ccdm_encode(BitWord(payload, leaf.payload_bits), inner)


def mpdm_decode(seq, cb: MpdmCodebook) -> BitWord:
    comp = Composition.from_sequence(seq, cb.alph)
    i, leaf = cb.leaf_for_composition(comp)
    inner = CcdmCodebook(cb.alph, leaf.composition, leaf.payload_bits)
    try:
        payload = ccdm_decode(seq, inner)
    except RankOverflow:
        raise RankOverflow(f"rank exceeds 2^{leaf.payload_bits} within leaf {leaf.composition.counts}") from None
    return BitWord(cb._starts[i] + payload.value, cb.k)


def mpdm_stats(cb: MpdmCodebook) -> dict:
    """Input length, leaf count, induced pmf, average energy and rate loss.

    The induced pmf is the 2^{b_i}-weighted leaf average computed in exact
    rational arithmetic; by the complementary-pair construction it equals
    target/n exactly.
    """
    n = cb.n
    tot = 1 << cb.k
    num = [Fraction(0) for _ in range(cb.alph.n_a)]
    for leaf in cb.leaves:
        w = 1 << leaf.payload_bits
        for j, c in enumerate(leaf.composition.counts):
            num[j] += Fraction(w * c, n * tot)
    pmf_exact = tuple(num)
    pmf = np.array([float(x) for x in pmf_exact])
    h = entropy(pmf)
    return {
        "k": cb.k,
        "n": n,
        "num_compositions": cb.num_compositions,
        "pmf": pmf,
        "pmf_exact": pmf_exact,
        "avg_energy": avg_energy(pmf, cb.alph),
        "rate_loss": h - cb.k / n,
        "entropy": h,
    }
