import pytest

from conftest import minus_2y_eps, x_eps
from src.core.errors import ContractError, InputError
from src.core.exact import ONE
from src.core.gauge import (
    EQUIVALENT,
    INEQUIVALENT,
    GaugeElement,
    GaugeGenerator,
    compose_gauge,
    exp_gauge,
    gauge_act,
    gauge_equivalent,
    identity_gauge,
    inverse_gauge,
    log_gauge,
)
from src.core.hochschild import Cochain, identity_cochain, mc_check
from src.core.relations import delta_of_beta, mc_rel_check
from src.core.sampling import (
    B2,
    B3,
    E1,
    E2,
    dual_numbers_2,
    random_algebra,
    random_derivation,
    random_generator,
    random_mc_element,
    seeded,
)


def _x_to_x_eps(alg, base):
    return GaugeGenerator.associative(Cochain(1, alg.dim, base, {(0,): {(0, 1): ONE}}))


# --- GROUP ELEMENTS ---

def test_generator_must_be_m_valued(e2, b2):
    with pytest.raises(InputError):
        GaugeGenerator.associative(Cochain(1, 2, b2, {(0,): {(0, 0): ONE}}))
    with pytest.raises(InputError):
        GaugeGenerator("associative", Cochain(2, 2, b2))


def test_gauge_element_shape(e2, b2):
    with pytest.raises(InputError):
        GaugeElement("associative", Cochain(1, 2, b2, {(0,): {(0, 0): 2 * ONE}}))
    assert identity_gauge(e2, b2).phi == identity_cochain(2, b2)


@pytest.mark.parametrize("seed", range(100))
def test_exp_log_round_trip(seed):
    rng = seeded(seed)
    base = B2() if seed % 2 else B3()
    alg = random_algebra(rng)
    generator = random_generator(rng, alg, base)
    element = exp_gauge(generator)
    assert log_gauge(element) == generator
    assert exp_gauge(log_gauge(element)) == element
    assert compose_gauge(element, inverse_gauge(element)) == identity_gauge(alg, base)


def test_exp_matrix_is_unipotent(e2, b3):
    generator = _x_to_x_eps(e2, b3)
    matrix = exp_gauge(generator).matrix()
    # x (x) 1 -> x (x) 1 + x (x) eps + 1/2 x (x) eps^2
    assert matrix.column(0) == {0: ONE, 1: ONE, 2: ONE / 2}


# --- ACTION ---

def test_worked_gauge_action(e2, b2):
    image = gauge_act(exp_gauge(_x_to_x_eps(e2, b2)), Cochain.zero(2, 2, b2, m_only=True), e2, b2)
    assert image == minus_2y_eps(e2, b2)


@pytest.mark.parametrize("seed", range(30))
def test_gauge_action_preserves_mc(seed):
    rng = seeded(500 + seed)
    base = [B2(), B3(), dual_numbers_2()][seed % 3]
    alg = random_algebra(rng)
    beta = random_mc_element(rng, alg, base)
    element = exp_gauge(random_generator(rng, alg, base))
    image = gauge_act(element, beta, alg, base)
    assert mc_check(image, alg, base).is_mc
    assert gauge_act(inverse_gauge(element), image, alg, base) == beta


@pytest.mark.parametrize("seed", range(15))
def test_action_respects_composition(seed):
    rng = seeded(1100 + seed)
    base = B3() if seed % 2 else dual_numbers_2()
    alg = random_algebra(rng, max_dim=2)
    beta = random_mc_element(rng, alg, base)
    first = exp_gauge(random_generator(rng, alg, base))
    second = exp_gauge(random_generator(rng, alg, base))
    composite = gauge_act(compose_gauge(first, second), beta, alg, base)
    assert composite == gauge_act(first, gauge_act(second, beta, alg, base), alg, base)


def test_action_needs_mc(e2, b2):
    beta = Cochain(2, 2, b2, {(0, 1): {(0, 1): ONE}}, m_only=True)
    with pytest.raises(ContractError):
        gauge_act(identity_gauge(e2, b2), beta, e2, b2)


# --- EQUIVALENCE ---

def test_worked_pair_is_equivalent(e2, b2):
    beta = minus_2y_eps(e2, b2)
    verdict = gauge_equivalent(Cochain.zero(2, 2, b2, m_only=True), beta, e2, b2)
    assert verdict.verdict == EQUIVALENT
    assert gauge_act(exp_gauge(verdict.generator), Cochain.zero(2, 2, b2), e2, b2) == beta


def test_order_one_obstruction(e1, b2):
    verdict = gauge_equivalent(Cochain.zero(2, 1, b2, m_only=True), x_eps(e1, b2), e1, b2)
    assert verdict.verdict == INEQUIVALENT
    assert verdict.order == 1


@pytest.mark.parametrize("seed", range(20))
def test_derived_pairs_are_equivalent(seed):
    rng = seeded(700 + seed)
    base = B2() if seed % 2 else dual_numbers_2()
    alg = random_algebra(rng, max_dim=2)
    beta = random_mc_element(rng, alg, base)
    generator = random_generator(rng, alg, base)
    target = gauge_act(exp_gauge(generator), beta, alg, base)
    verdict = gauge_equivalent(beta, target, alg, base)
    assert verdict.verdict == EQUIVALENT
    assert gauge_act(exp_gauge(verdict.generator), beta, alg, base) == target


def test_second_order_pair_over_b3(e2, b3):
    beta = random_mc_element(seeded(3), e2, b3)
    target = gauge_act(exp_gauge(_x_to_x_eps(e2, b3)), beta, e2, b3)
    verdict = gauge_equivalent(beta, target, e2, b3, search=True)
    assert verdict.verdict == EQUIVALENT
    assert gauge_act(exp_gauge(verdict.generator), beta, e2, b3) == target


def test_equivalence_needs_mc(e2, b2):
    bad = Cochain(2, 2, b2, {(0, 1): {(0, 1): ONE}}, m_only=True)
    with pytest.raises(ContractError):
        gauge_equivalent(bad, bad, e2, b2)


# --- RELATIONAL KIND ---

@pytest.mark.parametrize("seed", range(10))
def test_relational_exp_log(seed):
    rng = seeded(900 + seed)
    base = B2() if seed % 2 else B3()
    alg = E1() if seed % 3 else E2()
    theta = random_derivation(rng, alg, base, word_bound=2, degree=0, m_valued=True)
    generator = GaugeGenerator.relational(theta)
    assert log_gauge(exp_gauge(generator)) == generator


@pytest.mark.parametrize("seed", range(4))
def test_relational_action_lands_in_mc_rel(seed):
    rng = seeded(950 + seed)
    alg = E1() if seed % 2 else E2()
    base = B2()
    delta = delta_of_beta(x_eps(alg, base), alg, base, 3)
    theta = random_derivation(rng, alg, base, word_bound=3, degree=0, m_valued=True, density=0.3)
    image = gauge_act(exp_gauge(GaugeGenerator.relational(theta)), delta, alg, base, 3)
    assert mc_rel_check(image, alg, base, 3).is_mc
