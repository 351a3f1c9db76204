import cmath

import numpy as np
import pytest

from irs_csi.channel import los_coefficient
from irs_csi.codebook import build_codebook, dft_codeword, search_codeword
from irs_csi.geometry import IrsLayout, distance, make_rus, unit_position


def test_zero_beam_is_all_ones():
    assert np.allclose(dft_codeword(4, 4, 1, 1, 0, 0), np.ones(16))


def test_vertical_ramp():
    # u_2 = exp(j 2 pi 2 r / 4) = (-1)**r, repeated for every column
    expected = np.tile([1, -1, 1, -1], 4)
    assert np.allclose(dft_codeword(4, 4, 1, 1, 2, 0), expected, atol=1e-15)


def test_codeword_element_formula():
    w = dft_codeword(3, 5, 2, 3, 4, 7)
    for q in range(5):
        for r in range(3):
            want = cmath.exp(2j * cmath.pi * 4 * r / 6) * cmath.exp(2j * cmath.pi * 7 * q / 15)
            assert w[q * 3 + r] == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize("args", [(4, 4, 1, 1, 4, 0), (4, 4, 1, 1, 0, -1), (4, 4, 2, 1, 8, 0)])
def test_codeword_index_range(args):
    with pytest.raises(ValueError):
        dft_codeword(*args)


@pytest.mark.parametrize("dims, size", [((4, 4, 1, 1), 16), ((4, 4, 2, 2), 64), ((1, 1, 1, 1), 1)])
def test_codebook_size(dims, size):
    cb = build_codebook(*dims)
    assert len(cb) == size
    assert np.allclose(np.abs(cb.codewords), 1.0)


def test_codebook_order():
    cb = build_codebook(4, 4, 2, 2)
    assert cb.flat_index(3, 5) == 3 * 8 + 5
    assert cb.beam_indices(29) == (3, 5)
    assert np.allclose(cb.codewords[29], dft_codeword(4, 4, 2, 2, 3, 5))
    assert np.allclose(build_codebook(1, 1).codewords, [[1]])


def test_orthogonality():
    w = build_codebook(4, 4).codewords
    gram = w.conj() @ w.T
    assert np.allclose(gram, 16 * np.eye(16), atol=1e-12)


def test_single_codeword_search(layout, rus_set, rf):
    cb = build_codebook(1, 1)
    rus = make_rus(layout, 0, 0, 1, 1)
    assert search_codeword(cb, layout, rus, (5, -5, 0), (5, 3, 0), rf)[0] == 0


def test_broadside_selects_zero_beam(rf):
    lay = IrsLayout(4, 4)
    rus = make_rus(lay, 0, 0, 4, 4)
    c = rus.center
    ap = (400.0, c.y, c.z)
    ue = (300.0, c.y, c.z)
    cb = build_codebook(4, 4)
    # exhaustive oracle, element by element
    f = rf.center_frequency
    cascade = []
    for n in rus.member_indices:
        p = unit_position(lay, n)
        cascade.append(los_coefficient(rf, f, distance(p, ue)) * los_coefficient(rf, f, distance(p, ap)))
    powers = [abs(sum(wi * ci for wi, ci in zip(w, cascade))) ** 2 for w in cb.codewords]
    best = int(np.argmax(powers))
    assert best == cb.flat_index(0, 0)
    idx, power = search_codeword(cb, lay, rus, ap, ue, rf)
    assert idx == best
    assert power == pytest.approx(powers[best], rel=1e-10)


def test_search_dominance(layout, rus_set, rf):
    cb = build_codebook(4, 4, 2, 2)
    for rus in rus_set:
        idx, power = search_codeword(cb, layout, rus, (5, -5, 0), (7, 2, 0.5), rf)
        from irs_csi.channel import rus_cascade

        all_p = np.abs(cb.codewords @ rus_cascade(layout, rus, (5, -5, 0), (7, 2, 0.5), rf, 28e9)[0]) ** 2
        assert idx == int(np.argmax(all_p))
        assert power >= all_p.mean()
        assert power >= all_p[0]


def test_noisy_search_reproducible(layout, rus_set, rf):
    cb = build_codebook(4, 4)
    a = search_codeword(cb, layout, rus_set[0], (5, -5, 0), (15, 3, 0), rf, 0.1, np.random.default_rng(1))
    b = search_codeword(cb, layout, rus_set[0], (5, -5, 0), (15, 3, 0), rf, 0.1, np.random.default_rng(1))
    assert a == b
