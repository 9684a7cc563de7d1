from dataclasses import replace

import pytest

from conftest import minus_2y_eps, x_eps
from src.core.errors import ContractError, FlatnessError, InputError
from src.core.exact import ONE, SparseMatrix
from src.core.flat import (
    FlatDeformation,
    flat_equivalent,
    flat_to_mc,
    flatness_check,
    functor_F,
    transport_flat,
    validate_flat,
    verify_isomorphism,
)
from src.core.gauge import EQUIVALENT, INEQUIVALENT, exp_gauge, gauge_act, gauge_equivalent
from src.core.hochschild import Cochain, endomorphism_matrix, mc_check
from src.core.sampling import (
    B2,
    dual_numbers_2,
    random_algebra,
    random_cochain,
    random_generator,
    random_invertible,
    random_mc_element,
    seeded,
)


def _zero(alg, base):
    return Cochain.zero(2, alg.dim, base, m_only=True)


def _random_automorphism(rng, alg, base):
    """ B-linear automorphism of A_B: an invertible matrix on A plus an m-valued part. """
    values = {}
    for (l, i), c in random_invertible(rng, alg.dim).entries.items():
        values.setdefault((i,), {})[(l, 0)] = c
    perturbation = random_cochain(rng, 1, alg, base)
    return endomorphism_matrix(Cochain(1, alg.dim, base, values) + perturbation)


def _fibre_only(alg):
    """ A itself with m acting as zero: passes validation but is not free over B. """
    return FlatDeformation(
        alg.dim,
        [SparseMatrix.identity(alg.dim), SparseMatrix(alg.dim, alg.dim, {})],
        alg,
        SparseMatrix.identity(alg.dim),
    )


# --- VALIDATION AND FLATNESS ---

def test_functor_image_is_flat(e1, e2, b2, b3):
    assert flatness_check(functor_F(x_eps(e1, b2), e1, b2), e1, b2).flat
    assert flatness_check(functor_F(minus_2y_eps(e2, b2), e2, b2), e2, b2).flat
    assert flatness_check(functor_F(_zero(e2, b3), e2, b3), e2, b3).flat


def test_fibre_only_module_is_not_flat(e1, b2):
    t = _fibre_only(e1)
    validate_flat(t, e1, b2)
    report = flatness_check(t, e1, b2)
    assert not report.flat
    assert "carrier dimension" in report.reason
    with pytest.raises(FlatnessError):
        flat_to_mc(t, e1, b2)


def test_validation_errors(e2, b2):
    t = functor_F(x_eps(e2, b2), e2, b2)
    n = t.carrier_dim
    with pytest.raises(InputError):
        validate_flat(replace(t, b_action=t.b_action[:1]), e2, b2)
    with pytest.raises(InputError):
        validate_flat(replace(t, b_action=[SparseMatrix(n, n, {}), t.b_action[1]]), e2, b2)
    with pytest.raises(InputError):
        validate_flat(replace(t, reduction=SparseMatrix(e2.dim, n, {})), e2, b2)
    with pytest.raises(InputError):
        validate_flat(replace(t, reduction=SparseMatrix(e2.dim + 1, n, {})), e2, b2)


def test_functor_needs_mc(e2, b2):
    bad = Cochain(2, 2, b2, {(0, 1): {(0, 1): ONE}}, m_only=True)
    with pytest.raises(ContractError):
        functor_F(bad, e2, b2)


# --- ROUND TRIP THROUGH MC ---

@pytest.mark.parametrize("seed", range(10))
def test_flat_to_mc_inverts_the_functor(seed):
    rng = seeded(6000 + seed)
    base = B2() if seed % 2 else dual_numbers_2()
    alg = random_algebra(rng, max_dim=2)
    beta = random_mc_element(rng, alg, base)
    recovered = flat_to_mc(functor_F(beta, alg, base), alg, base)
    assert mc_check(recovered, alg, base).is_mc
    verdict = gauge_equivalent(beta, recovered, alg, base)
    assert verdict.verdict == EQUIVALENT
    assert gauge_act(exp_gauge(verdict.generator), beta, alg, base) == recovered


# --- EQUIVALENCE ---

def test_worked_isomorphism(e2, b2):
    t1 = functor_F(_zero(e2, b2), e2, b2)
    t2 = functor_F(minus_2y_eps(e2, b2), e2, b2)
    verdict = flat_equivalent(t1, t2, e2, b2)
    assert verdict.verdict == EQUIVALENT
    assert verify_isomorphism(verdict.isomorphism, t1, t2, e2)


def test_inequivalent_flat_deformations(e1, b2):
    t1 = functor_F(_zero(e1, b2), e1, b2)
    t2 = functor_F(x_eps(e1, b2), e1, b2)
    assert flat_equivalent(t1, t2, e1, b2).verdict == INEQUIVALENT
    assert not verify_isomorphism(SparseMatrix.identity(t1.carrier_dim), t1, t2, e1)


def test_transport_is_an_isomorphism(e2, b2):
    rng = seeded(42)
    t = functor_F(x_eps(e2, b2), e2, b2)
    s = _random_automorphism(rng, e2, b2)
    assert verify_isomorphism(s, t, transport_flat(t, s), e2)


def test_transport_must_be_b_linear(e2, b2):
    t = functor_F(x_eps(e2, b2), e2, b2)
    swap = SparseMatrix(4, 4, {(1, 0): ONE, (0, 1): ONE, (2, 2): ONE, (3, 3): ONE})
    with pytest.raises(InputError):
        transport_flat(t, swap)


@pytest.mark.parametrize("seed", range(20))
def test_flat_and_gauge_verdicts_agree(seed):
    rng = seeded(7000 + seed)
    base = B2() if seed % 2 else dual_numbers_2()
    alg = random_algebra(rng, max_dim=2)
    beta1 = random_mc_element(rng, alg, base)
    if seed % 3:
        beta2 = gauge_act(exp_gauge(random_generator(rng, alg, base)), beta1, alg, base)
    else:
        beta2 = random_mc_element(rng, alg, base)
    t1 = functor_F(beta1, alg, base)
    t2 = transport_flat(functor_F(beta2, alg, base), _random_automorphism(rng, alg, base))
    flat = flat_equivalent(t1, t2, alg, base)
    assert flat.verdict == gauge_equivalent(beta1, beta2, alg, base).verdict
    if flat.verdict == EQUIVALENT:
        assert verify_isomorphism(flat.isomorphism, t1, t2, alg)
