import random
from fractions import Fraction

import numpy as np
import pytest

from ampshape.ccdm import CcdmCodebook
from ampshape.core import AmplitudeAlphabet, BitWord, Composition, entropy, multinomial
from ampshape.errors import ConfigError, RankOverflow, UnknownComposition
from ampshape.mpdm import MpdmCodebook, build_mpdm, mpdm_decode, mpdm_encode, mpdm_input_length, mpdm_stats

from oracles import average_pmf, compositions_of, mpdm_k_by_enumeration, mpdm_pairs_by_enumeration

A2 = AmplitudeAlphabet(2)
A8 = AmplitudeAlphabet(3)


@pytest.fixture(scope="module")
def paper_codebook():
    return build_mpdm(Composition((95, 69, 37, 15)), A8)


def test_degenerate_target_single_leaf():
    cb = build_mpdm(Composition((4, 0)), A2)
    assert cb.k == 0
    assert len(cb.leaves) == 1
    assert cb.leaves[0].composition.counts == (4, 0)
    assert cb.leaves[0].prefix == ""
    st = mpdm_stats(cb)
    assert st["rate_loss"] == pytest.approx(entropy(cb.target.pmf()), abs=1e-12)


def test_toy_build_matches_exhaustive_partition():
    target = Composition((2, 2))
    cb = build_mpdm(target, A2)
    # oracle: enumerate all complementary pairs with permutation counting
    pairs = mpdm_pairs_by_enumeration((2, 2), (1, 3))
    assert cb.k == mpdm_k_by_enumeration((2, 2), (1, 3)) == 3
    # every leaf comes from an enumerated pair with matching payload cap
    for leaf in cb.leaves:
        key = next(k for k in pairs if leaf.composition.counts in k)
        assert leaf.payload_bits <= pairs[key]
    # Kraft equality
    assert sum(1 << l.payload_bits for l in cb.leaves) == 1 << cb.k


def test_invariants_pairing_and_average(paper_codebook):
    cb = paper_codebook
    by_comp = {l.composition.counts: l for l in cb.leaves}
    total = Fraction(0)
    for leaf in cb.leaves:
        partner = tuple(2 * t - c for t, c in zip(cb.target.counts, leaf.composition.counts))
        assert by_comp[partner].payload_bits == leaf.payload_bits
        total += Fraction(1 << leaf.payload_bits)
    assert total == 1 << cb.k
    st = mpdm_stats(cb)
    assert st["pmf_exact"] == tuple(Fraction(c, 216) for c in cb.target.counts)


def test_paper_example4(paper_codebook):
    assert 372 <= paper_codebook.k <= 376  # paper reports 374
    assert paper_codebook.k == 374
    st = mpdm_stats(paper_codebook)
    assert st["avg_energy"] == pytest.approx(11.00, abs=0.01)
    assert st["rate_loss"] == pytest.approx(0.0189, abs=0.003)
    assert st["num_compositions"] == 945


def test_k_exceeds_ccdm(paper_codebook):
    assert paper_codebook.k >= CcdmCodebook(A8, paper_codebook.target).k


def test_k_exceeds_ccdm_random_targets():
    rng = random.Random(4)
    for _ in range(10):
        counts = [rng.randint(0, 16) for _ in range(4)]
        if sum(counts) == 0:
            counts[0] = 2
        target = Composition(tuple(counts))
        assert mpdm_input_length(target) >= multinomial(target).bit_length() - 1


def test_exhaustive_codebook_toy():
    target = Composition((3, 3))
    cb = build_mpdm(target, A2)
    seqs = [tuple(mpdm_encode(BitWord(v, cb.k), cb)) for v in range(1 << cb.k)]
    assert len(set(seqs)) == 1 << cb.k  # injective
    # ensemble-average composition equals the target exactly
    assert average_pmf(seqs, (1, 3)) == [Fraction(1, 2), Fraction(1, 2)]
    # decoding inverts every word and never dead-ends
    for v, s in enumerate(seqs):
        assert mpdm_decode(s, cb).value == v
    # all-zero input: all-zero prefix leaf, payload 0, lexicographically first
    first_leaf = cb.leaves[0]
    assert set(first_leaf.prefix) <= {"0"}
    inner = CcdmCodebook(A2, first_leaf.composition, first_leaf.payload_bits)
    from ampshape.ccdm import ccdm_encode

    assert seqs[0] == tuple(ccdm_encode(BitWord(0, first_leaf.payload_bits), inner))


def test_decode_errors():
    cb = build_mpdm(Composition((3, 3)), A2)
    bad = [1] * 5 + [3]  # composition (5,1); complement (1,5) may be a leaf but (5,1) capacity differs
    comps = {l.composition.counts for l in cb.leaves}
    probe = None
    for counts in compositions_of(6, 2):
        if counts not in comps:
            probe = counts
            break
    if probe is not None:
        seq = [1] * probe[0] + [3] * probe[1]
        with pytest.raises(UnknownComposition):
            mpdm_decode(seq, cb)
    # rank overflow inside a leaf: the lexicographically largest arrangement
    # of a leaf whose payload does not cover its full permutation count
    for leaf in cb.leaves:
        if (1 << leaf.payload_bits) < multinomial(leaf.composition):
            seq = sorted([1] * leaf.composition.counts[0] + [3] * leaf.composition.counts[1], reverse=True)
            with pytest.raises(RankOverflow):
                mpdm_decode(seq, cb)
            break


def test_roundtrip_n216(paper_codebook):
    cb = paper_codebook
    rng = random.Random(6)
    for _ in range(1000):
        v = rng.getrandbits(cb.k)
        assert mpdm_decode(mpdm_encode(BitWord(v, cb.k), cb), cb).value == v


def test_k_limit_build():
    cb = build_mpdm(Composition((2, 2)), A2, k_limit=2)
    assert cb.k == 2
    assert sum(1 << l.payload_bits for l in cb.leaves) == 4
    with pytest.raises(ConfigError):
        build_mpdm(Composition((2, 2)), A2, k_limit=10)


def test_json_roundtrip():
    cb = build_mpdm(Composition((3, 3)), A2)
    cb2 = MpdmCodebook.from_json(cb.to_json())
    assert cb2.k == cb.k
    assert cb2.leaves == cb.leaves
    v = 5 % (1 << cb.k)
    assert mpdm_encode(BitWord(v, cb.k), cb2) == mpdm_encode(BitWord(v, cb.k), cb)
