"""Brute-force reference implementations used to pin expected values.

Everything here enumerates explicitly (itertools over small alphabets) or
evaluates with generic numerics (Monte Carlo, high-precision arithmetic),
independently of the package's trellis/ranking machinery.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def all_permutations(counts, levels):
    """Distinct permutations of a composition, lexicographically sorted."""
    bag = []
    for c, a in zip(counts, levels):
        bag.extend([a] * c)
    return sorted(set(itertools.permutations(bag)))


def sphere_listing(n, levels, e_max):
    """All sequences of levels^n with energy <= e_max, lexicographic order."""
    out = [s for s in itertools.product(levels, repeat=n) if sum(a * a for a in s) <= e_max]
    out.sort()
    return out


def dc_key(seq):
    """Energy-major divide-and-conquer sort key: total energy, then the
    recursive (left-half energy, left key, right key) decomposition with the
    left half of length floor(n/2)."""
    seq = tuple(seq)
    if len(seq) == 1:
        return (seq[0] * seq[0],)
    half = len(seq) // 2
    left, right = seq[:half], seq[half:]
    return (sum(a * a for a in seq),) + dc_key(left) + dc_key(right)


def energy_major_listing(n, levels, e_max):
    return sorted(sphere_listing(n, levels, e_max), key=dc_key)


def compositions_of(n, parts):
    """All length-``parts`` nonnegative integer vectors summing to n."""
    if parts == 1:
        return [(n,)]
    out = []
    for first in range(n + 1):
        for rest in compositions_of(n - first, parts - 1):
            out.append((first,) + rest)
    return out


def best_quantization(p, n):
    """Exhaustive KL-minimizing n-type; ties to lexicographically smallest."""
    best = None
    best_d = None
    for counts in compositions_of(n, len(p)):
        d = 0.0
        ok = True
        for c, pj in zip(counts, p):
            if c == 0:
                continue
            if pj <= 0:
                ok = False
                break
            d += (c / n) * math.log2(c / (n * pj))
        if not ok:
            continue
        if best_d is None or d < best_d - 1e-15 or (abs(d - best_d) <= 1e-15 and counts < best):
            best, best_d = counts, d
    return best


def multinomial_by_enumeration(counts, levels=None):
    if levels is None:
        levels = list(range(1, 2 * len(counts), 2))
    return len(all_permutations(counts, levels))


def mpdm_pairs_by_enumeration(target, levels):
    """All complementary composition pairs and their payload capacities.

    Returns {frozenset of compositions: payload_bits}; the multinomials come
    from explicit permutation counts.
    """
    n = sum(target)
    pairs = {}
    for counts in compositions_of(n, len(target)):
        partner = tuple(2 * t - c for t, c in zip(target, counts))
        if any(x < 0 for x in partner):
            continue
        key = frozenset([counts, partner])
        if key in pairs:
            continue
        if counts == partner:
            pay = multinomial_by_enumeration(counts, levels).bit_length() - 1
        else:
            pay = min(multinomial_by_enumeration(counts, levels).bit_length(),
                      multinomial_by_enumeration(partner, levels).bit_length()) - 1
        pairs[key] = pay
    return pairs


def mpdm_k_by_enumeration(target, levels):
    pairs = mpdm_pairs_by_enumeration(target, levels)
    total = 0
    for key, pay in pairs.items():
        total += (1 << pay) if len(key) == 1 else (1 << (pay + 1))
    return total.bit_length() - 1


def average_pmf(sequences, levels):
    """Per-position amplitude frequencies over an explicit codebook, exact."""
    counts = {a: 0 for a in levels}
    tot = 0
    for s in sequences:
        for a in s:
            counts[a] += 1
            tot += 1
    return [Fraction(counts[a], tot) for a in levels]


def average_energy(sequences):
    n = len(sequences[0])
    return Fraction(sum(sum(a * a for a in s) for s in sequences), n * len(sequences))


def rbmd_monte_carlo(p_x, points, labels, snr_db, samples, seed=0):
    """H(X) - sum_j H(B_j|Y) by sampling; cross-checks the quadrature."""
    rng = np.random.default_rng(seed)
    p_x = np.asarray(p_x, float)
    es = float(np.sum(p_x * points**2))
    sigma = math.sqrt(es / 10 ** (snr_db / 10))
    idx = rng.choice(len(points), size=samples, p=p_x)
    y = points[idx] + sigma * rng.standard_normal(samples)
    ll = -((y[:, None] - points[None, :]) ** 2) / (2 * sigma * sigma) + np.log(p_x)[None, :]
    mx = ll.max(axis=1, keepdims=True)
    den = mx[:, 0] + np.log(np.exp(ll - mx).sum(axis=1))
    hx = -float(np.sum(p_x * np.log2(p_x)))
    total = hx
    m = labels.shape[1]
    for j in range(m):
        true_bit = labels[idx, j]
        h = np.empty(samples)
        for u in (0, 1):
            sel = true_bit == u
            sub = ll[sel][:, labels[:, j] == u]
            mxs = sub.max(axis=1, keepdims=True)
            num = mxs[:, 0] + np.log(np.exp(sub - mxs).sum(axis=1))
            h[sel] = -(num - den[sel]) / math.log(2)
        total -= float(h.mean())
    return total


def llr_reference(y, snr_db, p_x, points, labels, j, dps=50):
    """Bit LLR evaluated term by term in 50-digit arithmetic."""
    import mpmath

    with mpmath.workdps(dps):
        es = mpmath.fsum(mpmath.mpf(p) * mpmath.mpf(float(x)) ** 2 for p, x in zip(p_x, points))
        sigma2 = es / mpmath.mpf(10) ** (mpmath.mpf(snr_db) / 10)
        num = mpmath.mpf(0)
        den = mpmath.mpf(0)
        for p, x, lab in zip(p_x, points, labels):
            term = mpmath.mpf(p) * mpmath.exp(-((mpmath.mpf(y) - mpmath.mpf(float(x))) ** 2) / (2 * sigma2))
            if lab[j] == 0:
                num += term
            else:
                den += term
        return float(mpmath.log(num / den))
