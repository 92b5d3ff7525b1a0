import math
import random
from fractions import Fraction

import numpy as np
import pytest

from ampshape.core import AmplitudeAlphabet, BitWord, Composition
from ampshape.errors import ConfigError, EnergyOverflow, RankOverflow
from ampshape.spsh import (
    BoundedNumber,
    admissible_e_max,
    build_ess_trellis,
    build_sm_tables,
    choose_mantissa_bits,
    ess_decode,
    ess_encode,
    induced_pmf,
    load_structure,
    min_radius,
    num_shells,
    round_down_mantissa,
    save_structure,
    sm_decode,
    sm_encode,
)

from oracles import average_energy, average_pmf, dc_key, energy_major_listing, sphere_listing

A2 = AmplitudeAlphabet(2)
A8 = AmplitudeAlphabet(3)


def test_num_shells():
    assert num_shells(64, 768) == 89  # paper example: E=768 at n=64
    assert num_shells(10, 10) == 1
    # n=4 over {1,3}: energies of all 16 sequences are {4,12,20,28,36}
    energies = sorted({sum(a * a for a in s) for s in sphere_listing(4, (1, 3), 36)})
    assert energies == [4, 12, 20, 28, 36]
    assert num_shells(4, 36) == len(energies)
    assert admissible_e_max(4, 39) == 36
    with pytest.raises(ConfigError):
        num_shells(4, 3)


def test_shell_count_matches_enumeration():
    for n in (2, 3, 5, 8):
        emax = n * 9
        energies = {sum(a * a for a in s) for s in sphere_listing(n, (1, 3), emax)}
        assert num_shells(n, emax) == len(energies)


def test_min_radius():
    assert min_radius(216, A8, 374) == 2376  # paper example 7
    assert min_radius(10, A8, 0) == 10
    # n=4 over {1,3}, k=3: smallest sphere with >= 8 sequences
    want = None
    for L in range(1, 6):
        emax = 4 + 8 * (L - 1)
        if len(sphere_listing(4, (1, 3), emax)) >= 8:
            want = emax
            break
    assert min_radius(4, A2, 3) == want
    with pytest.raises(ConfigError):
        min_radius(4, A2, 9)


def test_trellis_paper_example5():
    tr = build_ess_trellis(64, A8, 768)
    assert tr.L == 89
    assert abs(math.log2(tr.size) - 112.24) <= 0.05
    assert tr.k == 112
    pmf, energy = induced_pmf(tr)
    assert np.allclose(pmf, [0.42, 0.32, 0.18, 0.08], atol=0.005)
    assert energy == pytest.approx(11.6316, abs=0.01)


def test_trellis_toy_counts():
    from ampshape.spsh import _ess_unrank

    tr = build_ess_trellis(2, A2, 10)
    assert tr.size == 3  # (1,1), (1,3), (3,1)
    assert [tuple(_ess_unrank(tr, r)) for r in range(3)] == [(1, 1), (1, 3), (3, 1)]
    # (3,1) has rank 2 >= 2^k with k = floor(log2 3) = 1: an unused sequence
    with pytest.raises(RankOverflow):
        ess_decode([3, 1], tr)


def test_ess_matches_lexicographic_listing():
    tr = build_ess_trellis(4, A2, 20)
    listing = sphere_listing(4, (1, 3), 20)
    assert tr.size == len(listing)
    full = tr.with_k(tr.size.bit_length() - 1)
    for rank in range(1 << full.k):
        seq = ess_encode(BitWord(rank, full.k), full)
        assert tuple(seq) == listing[rank]
        assert ess_decode(seq, full).value == rank


def test_ess_errors():
    tr = build_ess_trellis(4, A2, 20)
    with pytest.raises(EnergyOverflow):
        ess_decode([3, 3, 3, 3], tr)
    listing = sphere_listing(4, (1, 3), 20)
    with pytest.raises(RankOverflow):
        ess_decode(listing[-1], tr)  # rank 10 >= 2^3
    with pytest.raises(ConfigError):
        ess_encode(BitWord(0, 2), tr)


def test_ess_roundtrip_and_order_n216():
    tr = build_ess_trellis(216, A8, 2376)
    assert tr.k == 374
    rng = random.Random(8)
    prev = None
    for _ in range(400):
        v = rng.getrandbits(tr.k)
        seq = ess_encode(BitWord(v, tr.k), tr)
        assert sum(a * a for a in seq) <= 2376
        assert ess_decode(seq, tr).value == v
    # order preservation on random pairs
    for _ in range(50):
        v1, v2 = sorted(rng.getrandbits(tr.k) for _ in range(2))
        if v1 == v2:
            continue
        assert ess_encode(BitWord(v1, tr.k), tr) < ess_encode(BitWord(v2, tr.k), tr)


def test_bounded_precision_trellis():
    fp = build_ess_trellis(64, A8, 768)
    bp = build_ess_trellis(64, A8, 768, "bp:9,7")
    for rfp, rbp in zip(fp.rows, bp.rows):
        assert all(b <= f for f, b in zip(rfp, rbp))
    loss = math.log2(fp.size) - math.log2(bp.size)
    assert loss <= 64 * 0.0056  # paper bound at n_m=9
    assert loss / 64 <= -math.log2(1 - 2 ** (1 - 9))
    assert bp.size.bit_length() - 1 == 112
    # rounded values are exactly representable with a 9-bit mantissa
    for row in bp.rows:
        for v in row:
            b = BoundedNumber.from_int(v, 9)
            assert b.to_int() == v
    rng = random.Random(10)
    for _ in range(300):
        v = rng.getrandbits(bp.k)
        assert ess_decode(ess_encode(BitWord(v, bp.k), bp), bp).value == v


def test_round_down_mantissa():
    assert round_down_mantissa(0b101011, 4) == 0b101000
    assert round_down_mantissa(7, 4) == 7
    assert BoundedNumber.from_int(0b101000, 4) == BoundedNumber(0b1010, 2)


def test_sm_size_equals_ess():
    for n, emax in ((8, 88), (64, 768)):
        ess = build_ess_trellis(n, A8, emax)
        sm = build_sm_tables(n, A8, emax)
        assert sm.size == ess.size


def test_sm_energy_major_listing():
    tables = build_sm_tables(4, A2, 20)
    listing = energy_major_listing(4, (1, 3), 20)
    assert tables.size == len(listing)
    full = tables.with_k(tables.size.bit_length() - 1)
    for rank, seq in enumerate(listing):
        if rank >= (1 << full.k):
            break
        assert tuple(sm_encode(BitWord(rank, full.k), full)) == seq
        assert sm_decode(seq, full).value == rank
    # energy-nondecreasing along the index
    energies = [sum(a * a for a in sm_encode(BitWord(r, full.k), full)) for r in range(1 << full.k)]
    assert energies == sorted(energies)


def test_sm_roundtrip_n216():
    tables = build_sm_tables(216, A8, 2376)
    assert tables.k == 374
    rng = random.Random(12)
    for _ in range(300):
        v = rng.getrandbits(tables.k)
        seq = sm_encode(BitWord(v, tables.k), tables)
        assert sm_decode(seq, tables).value == v


def test_sm_odd_blocklength():
    tables = build_sm_tables(7, A2, 39)
    listing = energy_major_listing(7, (1, 3), 39)
    assert tables.size == len(listing)
    full = tables.with_k(tables.size.bit_length() - 1)
    for rank in range(1 << full.k):
        assert tuple(sm_encode(BitWord(rank, full.k), full)) == listing[rank]


def test_sm_errors():
    tables = build_sm_tables(4, A2, 20)
    with pytest.raises(EnergyOverflow):
        sm_decode([3, 3, 3, 3], tables)
    listing = energy_major_listing(4, (1, 3), 20)
    with pytest.raises(RankOverflow):
        sm_decode(listing[-1], tables)


def test_sm_bounded_precision():
    fp = build_sm_tables(64, A8, 768)
    bp = build_sm_tables(64, A8, 768, "bp:9,7")
    for length in fp.g:
        assert all(b <= f for f, b in zip(fp.g[length], bp.g[length]))
    assert bp.size.bit_length() - 1 == 112
    rng = random.Random(13)
    for _ in range(300):
        v = rng.getrandbits(bp.k)
        assert sm_decode(sm_encode(BitWord(v, bp.k), bp), bp).value == v


def test_induced_pmf_truncation_toy():
    # direct averaging over the used part of the enumerated codebook
    for builder, order in ((build_ess_trellis, sphere_listing), (build_sm_tables, energy_major_listing)):
        s = builder(4, A2, 20)
        listing = order(4, (1, 3), 20)
        for k in (1, 2, 3):
            used = listing[: 1 << k]
            pmf, energy = induced_pmf(s, k)
            want = average_pmf(used, (1, 3))
            assert all(Fraction(p).limit_denominator(10**12) == w for p, w in zip(pmf, want))
            assert Fraction(energy).limit_denominator(10**12) == average_energy(used)


def test_induced_pmf_paper_example7():
    tr = build_ess_trellis(216, A8, 2376)
    pmf, energy = induced_pmf(tr)
    assert np.allclose(pmf, [0.4393, 0.3220, 0.1722, 0.0665], atol=0.0005)
    assert energy == pytest.approx(10.90, abs=0.01)


def test_energy_ordering_sphere_vs_shell():
    # every sphere sequence obeys the energy bound; SM discards only the
    # highest-energy tail while ESS discards the lexicographic tail
    tr = build_ess_trellis(8, A8, 88)
    sm = build_sm_tables(8, A8, 88)
    _, e_ess = induced_pmf(tr)
    _, e_sm = induced_pmf(sm)
    assert e_sm <= e_ess + 1e-12


def test_choose_mantissa_bits():
    n_m, n_p = choose_mantissa_bits(64, A8, 768, "ess")
    fp = build_ess_trellis(64, A8, 768)
    bp = build_ess_trellis(64, A8, 768, f"bp:{n_m},{n_p}")
    assert bp.size >= 1 << (fp.size.bit_length() - 1)
    if n_m > 2:
        smaller = build_ess_trellis(64, A8, 768, f"bp:{n_m - 1},{n_p}")
        assert smaller.size < 1 << (fp.size.bit_length() - 1)


def test_container_roundtrip(tmp_path):
    for build, name in ((build_ess_trellis, "ess"), (build_sm_tables, "sm")):
        s = build(16, A8, 176, "bp:9,7")
        path = tmp_path / f"{name}.bin"
        save_structure(s, str(path))
        s2 = load_structure(str(path))
        assert s2.kind == s.kind and s2.n == s.n and s2.e_max == s.e_max
        assert s2.k == s.k and s2.precision == s.precision
        if name == "ess":
            assert s2.rows == s.rows
            v = 123 % (1 << s.k)
            assert ess_encode(BitWord(v, s.k), s2) == ess_encode(BitWord(v, s.k), s)
        else:
            assert s2.g == s.g
            v = 321 % (1 << s.k)
            assert sm_encode(BitWord(v, s.k), s2) == sm_encode(BitWord(v, s.k), s)
