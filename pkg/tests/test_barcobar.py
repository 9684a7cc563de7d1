import pytest

from conftest import x_eps
from src.core.algebra import ground_field
from src.core.barcobar import (
    CobarWord,
    build_complex,
    cobar_differential,
    cohomology_dimension,
    compositions,
    dump_complex,
    enumerate_words,
    homotopy_defects,
    merge_terms,
    projection_p,
    split_terms,
    splitting_homotopy,
)
from src.core.errors import InputError
from src.core.exact import ONE
from src.core.hochschild import product_cochain
from src.core.sampling import E1, E2


def _word(*blocks):
    return CobarWord(tuple(tuple(block) for block in blocks))


def test_word_gradings():
    word = _word((0, 1), (1,), (0, 0, 1))
    assert word.polydegree == 6
    assert word.arrows == 3
    assert word.degree == -3
    assert word.letters == (0, 1, 1, 0, 0, 1)


def test_empty_blocks_are_rejected():
    with pytest.raises(InputError):
        CobarWord(((),))
    with pytest.raises(InputError):
        CobarWord(())


def test_compositions():
    assert list(compositions(4, 2)) == [(1, 3), (2, 2), (3, 1)]
    assert list(compositions(2, 3)) == []


@pytest.mark.parametrize(
    "word_bound, degree, count",
    [(2, 0, 2), (2, -1, 1), (3, -1, 3), (3, -2, 1), (4, 0, 4)],
)
def test_enumerated_word_counts(word_bound, degree, count):
    assert len(enumerate_words(1, word_bound, degree)) == count


def test_enumerated_words_are_graded():
    for degree in range(-3, 1):
        for word in enumerate_words(2, 4, degree):
            assert word.degree == word.arrows - word.polydegree == degree
            assert word.polydegree <= 4


def test_degree_minus_one_words_in_one_variable():
    words = set(enumerate_words(1, 3, -1))
    assert words == {_word((0, 0)), _word((0,), (0, 0)), _word((0, 0), (0,))}


def test_enumerate_words_bounds():
    with pytest.raises(InputError):
        enumerate_words(1, 0, 0)
    with pytest.raises(InputError):
        enumerate_words(1, 3, 1)


def test_differential_of_a_length_two_block(e2):
    assert cobar_differential(_word((0, 0)), e2) == {
        (_word((0,), (0,)), 0): -ONE,
        (_word((1,)), 0): ONE,
    }


def test_split_and_merge_signs(e2):
    block = (0, 0, 0)
    assert split_terms(block) == {(_word((0,), (0, 0)), 0): -ONE, (_word((0, 0), (0,)), 0): ONE}
    assert merge_terms(block, product_cochain(e2, ground_field())) == {
        (_word((1, 0)), 0): ONE,
        (_word((0, 1)), 0): -ONE,
    }


@pytest.mark.parametrize("alg", [E1(), E2()], ids=["E1", "E2"])
def test_undeformed_complex_squares_to_zero(alg):
    complex_ = build_complex(alg, 4)
    assert complex_.is_square_zero()


@pytest.mark.parametrize("alg", [E1(), E2()], ids=["E1", "E2"])
def test_deformed_complex_squares_to_zero(alg, b2):
    complex_ = build_complex(alg, 4, b2, x_eps(alg, b2))
    assert complex_.is_square_zero()


@pytest.mark.parametrize("alg", [E1(), E2()], ids=["E1", "E2"])
def test_h0_of_the_undeformed_complex(alg):
    assert cohomology_dimension(build_complex(alg, 3), 0) == alg.dim


@pytest.mark.parametrize("word_bound", [3, 4])
@pytest.mark.parametrize("alg", [E1(), E2()], ids=["E1", "E2"])
def test_resolution_is_acyclic_in_degree_minus_one(alg, word_bound):
    assert cohomology_dimension(build_complex(alg, word_bound), -1) == 0


def test_complex_is_built_with_all_matrices(e1):
    complex_ = build_complex(e1, 3)
    assert sorted(complex_.differential_matrices) == [-2, -1]
    assert complex_.differential_matrices[-1].rows == len(complex_.cells(0))


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("polydegree", [2, 3, 4])
def test_splitting_homotopy(dim, polydegree):
    assert homotopy_defects(dim, polydegree) == []


def test_homotopy_on_examples():
    assert splitting_homotopy(_word((0,), (1, 0))) == {(_word((0, 1, 0)), 0): -ONE}
    assert splitting_homotopy(_word((0, 1), (0,))) == {}
    assert splitting_homotopy(_word((0,))) == {}


def test_projection(e2):
    assert projection_p(_word((0,), (0,)), e2) == {1: ONE}
    assert projection_p(_word((0, 0)), e2) == {}
    assert projection_p(_word((0,), (1,)), e2) == {}


def test_dump_complex(e1):
    dump = dump_complex(build_complex(e1, 2), e1)
    assert dump["word_bound"] == 2
    assert dump["degrees"]["-1"]["basis"] == [{"word": [["x", "x"]], "b": "1"}]
    assert dump["degrees"]["-1"]["differential"] == [[1, 0, "-1"]]
