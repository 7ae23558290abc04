import numpy as np
import pytest

from hcpy.poly import degree
from hcpy.systems import BENCHMARKS, cyclic, get_system, katsura


def test_cyclic3():
    F = cyclic(3)
    assert len(F) == 3 and [degree(p) for p in F] == [1, 2, 3]
    # the cube roots of unity, in order, are a cyclic 3-root
    w = np.exp(2j * np.pi / 3)
    assert np.allclose(F.evaluate(np.array([1, w, w * w])), 0)


def test_katsura_structure():
    F = katsura(2)
    assert F.nvars == 3 and len(F) == 3
    # x0 = 1, x1 = x2 = 0 solves every katsura system
    assert np.allclose(F.evaluate(np.array([1.0, 0, 0])), 0)
    assert [degree(p) for p in katsura(11)] == [1] + [2] * 11


@pytest.mark.parametrize("name", list(BENCHMARKS))
def test_corpus_shapes(name):
    F = get_system(name)
    entry = BENCHMARKS[name]
    assert F.is_square
    assert int(np.prod([degree(p) for p in F])) == entry.bezout


def test_unknown_system():
    with pytest.raises(FileNotFoundError):
        get_system("nosuch")
