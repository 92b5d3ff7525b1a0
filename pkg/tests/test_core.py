import math
import random

import numpy as np
import pytest

from ampshape.core import (
    AmplitudeAlphabet,
    BitWord,
    Composition,
    avg_energy,
    entropy,
    mb_from_entropy,
    mb_pmf,
    multinomial,
    optimize_mb,
    quantize_pmf,
)
from ampshape.errors import ConfigError

from oracles import best_quantization, compositions_of, multinomial_by_enumeration

A8 = AmplitudeAlphabet(3)
EX3_PMF = [0.4378, 0.3212, 0.1728, 0.0682]


def test_alphabet_levels():
    assert A8.levels == (1, 3, 5, 7)
    assert A8.n_a == 4
    assert AmplitudeAlphabet(2).levels == (1, 3)
    assert A8.index_of(5) == 2
    with pytest.raises(ConfigError):
        A8.index_of(2)
    with pytest.raises(ConfigError):
        A8.index_of(9)


def test_bitword_roundtrips():
    w = BitWord.from_bits([1, 0, 1, 1, 0])
    assert w.value == 0b10110 and w.length == 5
    assert w.to_bits() == [1, 0, 1, 1, 0]
    assert BitWord.from_hex(w.to_hex(), 5) == w
    assert BitWord(0, 0).to_hex() == ""
    with pytest.raises(ConfigError):
        BitWord(4, 2)


def test_multinomial_paper_example3():
    c = Composition((95, 69, 37, 15))
    assert c.n == 216
    assert multinomial(c).bit_length() - 1 == 367


def test_multinomial_trivial_and_derived():
    for n in (1, 4, 17):
        assert multinomial(Composition((n, 0, 0, 0))) == 1
    # (1,1,3,3) over {1,3}: six distinct arrangements counted by hand
    assert multinomial(Composition((2, 2))) == 6
    assert multinomial_by_enumeration((2, 2), (1, 3)) == 6


def test_multinomial_matches_enumeration_small():
    for n_a in (2, 3):
        for n in range(1, 9):
            for counts in compositions_of(n, n_a):
                assert multinomial(Composition(counts)) == multinomial_by_enumeration(counts)


def test_entropy_values():
    assert entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-12)
    assert entropy(EX3_PMF) == pytest.approx(1.75, abs=1e-3)
    # the quantized target of the running example, printed as
    # [0.4398, 0.3194, 0.1713, 0.0694]; entropy quoted as 1.7504
    assert entropy(Composition((95, 69, 37, 15)).pmf()) == pytest.approx(1.7504, abs=1e-4)
    assert entropy([0.4398, 0.3194, 0.1713, 0.0694]) == pytest.approx(1.7504, abs=5e-4)
    assert entropy([1.0, 0.0, 0.0, 0.0]) == 0.0


def test_avg_energy_values():
    assert avg_energy([0.5, 0.5], AmplitudeAlphabet(2)) == pytest.approx(5.0)
    assert avg_energy([0.4398, 0.3194, 0.1713, 0.0694], A8) == pytest.approx(11.00, abs=0.01)
    # quoted as E=11.6316 for the sphere-induced pmf printed as
    # [0.42, 0.32, 0.18, 0.08]; the display rounding alone moves E by ~0.09,
    # so the full-precision pmf (frozen from the n=64, E=768 trellis) is used
    induced = [0.4200392, 0.3201738, 0.1833148, 0.0764722]
    assert avg_energy(induced, A8) == pytest.approx(11.6316, abs=0.01)
    assert avg_energy([0.42, 0.32, 0.18, 0.08], A8) == pytest.approx(11.6316, abs=0.1)


def test_mb_from_entropy():
    uni = mb_from_entropy(A8, 2.0)
    assert uni.lam == pytest.approx(0.0, abs=1e-9)
    assert np.allclose(uni.pmf, 0.25)

    mb = mb_from_entropy(A8, 1.75)
    assert np.allclose(mb.pmf, EX3_PMF, atol=5e-4)

    bin2 = mb_from_entropy(AmplitudeAlphabet(2), 1.0)
    assert np.allclose(bin2.pmf, [0.5, 0.5], atol=1e-9)

    with pytest.raises(ConfigError):
        mb_from_entropy(A8, 2.5)


def test_mb_entropy_roundtrip():
    for h in np.linspace(0.3, 1.99, 12):
        assert mb_from_entropy(A8, float(h)).entropy == pytest.approx(h, abs=1e-9)


def test_mb_energy_monotone_in_lambda():
    lams = np.linspace(0.0, 1.2, 13)
    energies = [avg_energy(mb_pmf(A8, float(l)), A8) for l in lams]
    assert all(a > b for a, b in zip(energies, energies[1:]))


def _grid_best_lambda(snr_db, metric):
    from ampshape.labeling import BrgcLabeling
    from ampshape.metrics import mutual_information, rbmd, symbol_pmf

    lab = BrgcLabeling(3)
    f = rbmd if metric == "RBMD" else mutual_information
    grid = np.arange(0.0, 0.5, 0.01)
    scores = [f(symbol_pmf(mb_pmf(A8, float(l))), snr_db, lab) for l in grid]
    return float(grid[int(np.argmax(scores))]), max(scores)


def test_optimize_mb_high_snr_is_uniform():
    assert optimize_mb(A8, 40.0, "RBMD").lam < 1e-2


@pytest.mark.parametrize("snr_db,h_range", [(14.0, (1.70, 1.85)), (10.7, (1.45, 1.60))])
def test_optimize_mb_against_grid(snr_db, h_range):
    from ampshape.labeling import BrgcLabeling
    from ampshape.metrics import rbmd, symbol_pmf

    mb = optimize_mb(A8, snr_db, "RBMD")
    assert h_range[0] <= mb.entropy <= h_range[1]
    _, grid_best = _grid_best_lambda(snr_db, "RBMD")
    mine = rbmd(symbol_pmf(mb.pmf), snr_db, BrgcLabeling(3))
    assert mine >= grid_best - 1e-4


def test_quantize_exact_type():
    p = np.array([3, 2, 2, 1], dtype=float) / 8
    assert quantize_pmf(p, 8).counts == (3, 2, 2, 1)
    assert quantize_pmf(p, 16).counts == (6, 4, 4, 2)


def test_quantize_paper_example3():
    assert quantize_pmf(EX3_PMF, 216).counts == (95, 69, 37, 15)


def test_quantize_matches_exhaustive():
    rng = random.Random(11)
    for _ in range(25):
        raw = [rng.random() + 0.05 for _ in range(3)]
        p = [x / sum(raw) for x in raw]
        assert quantize_pmf(p, 6).counts == best_quantization(p, 6)
    # a zero-probability level never receives mass
    assert quantize_pmf([0.7, 0.3, 0.0], 6).counts == best_quantization([0.7, 0.3, 0.0], 6)


def test_quantize_entropy_converges():
    p = mb_from_entropy(A8, 1.6).pmf
    errs = [abs(entropy(quantize_pmf(p, n).pmf()) - entropy(p)) for n in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]
