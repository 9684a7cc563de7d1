import logging
import random

from sympy import QQ

from .algebra import ArtinLocalAlgebra, FiniteAlgebra, transport_algebra, zero_constants
from .barcobar import enumerate_words
from .config import DEFAULT_SETTINGS
from .exact import ONE, ZERO, LinearSolver, SparseMatrix, rank
from .gauge import GaugeGenerator, exp_gauge, gauge_act
from .hochschild import Cochain, cochain_from_vector, cochain_levels, differential_matrix, mc_check
from .relations import Derivation, all_blocks

LOGGER = logging.getLogger(__name__)


# --- NAMED EXAMPLES ---

def _algebra(names, products):
    """ products: {(i, j): {l: coefficient}}. """
    constants = zero_constants(len(names))
    for (i, j), value in products.items():
        for l, c in value.items():
            constants[i][j][l] = QQ(c)
    return FiniteAlgebra(len(names), tuple(names), constants)


def E1():
    """ x x = 0. """
    return _algebra(["x"], {})


def E2():
    """ x x = y, everything else 0: the ideal (t) in k[t]/(t^3). """
    return _algebra(["x", "y"], {(0, 0): {1: 1}})


def truncated_polynomials(n):
    """ k[eps]/(eps^n) in the basis 1, eps, ..., eps^(n-1). """
    names = ["1"] + ["eps" if k == 1 else f"eps{k}" for k in range(1, n)]
    constants = zero_constants(n)
    for a in range(n):
        for b in range(n):
            if a + b < n:
                constants[a][b][a + b] = ONE
    return ArtinLocalAlgebra(n, tuple(names), constants, nilpotency=n)


def B2():
    return truncated_polynomials(2)


def B3():
    return truncated_polynomials(3)


def dual_numbers_2():
    """ k[eps, eta]/(eps, eta)^2. """
    constants = zero_constants(3)
    for b in range(3):
        constants[0][b][b] = ONE
        constants[b][0][b] = ONE
    return ArtinLocalAlgebra(3, ("1", "eps", "eta"), constants, nilpotency=2)


def algebra_pool():
    """ Known associative algebras of dimension <= 3. """
    return [
        E1(),
        E2(),
        _algebra(["e"], {(0, 0): {0: 1}}),
        _algebra(["a", "b"], {}),
        _algebra(["e", "f"], {(0, 0): {0: 1}, (1, 1): {1: 1}}),
        _algebra(["e", "n"], {(0, 0): {0: 1}, (0, 1): {1: 1}}),
        _algebra(["x", "y", "z"], {(0, 0): {1: 1}, (0, 1): {2: 1}, (1, 0): {2: 1}}),
        _algebra(["e11", "e12", "e22"], {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 2): {1: 1}, (2, 2): {2: 1}}),
        _algebra(["x", "y", "e"], {(0, 0): {1: 1}, (2, 2): {2: 1}}),
        _algebra(["a", "b", "c"], {}),
    ]


# --- RANDOM INPUTS ---

def random_rational(rng, radius=2):
    return QQ(rng.randint(-radius, radius), rng.choice((1, 1, 1, 2, 3)))


def random_invertible(rng, n, radius=2):
    while True:
        rows = [[QQ(rng.randint(-radius, radius)) for _ in range(n)] for _ in range(n)]
        if rank(rows) == n:
            return SparseMatrix.from_dense(rows)


def random_algebra(rng, max_dim=3):
    candidates = [alg for alg in algebra_pool() if alg.dim <= max_dim]
    alg = rng.choice(candidates)
    return transport_algebra(alg, random_invertible(rng, alg.dim))


def random_cochain(rng, arity, alg, base, density=0.4):
    """ m-valued cochain with small random coefficients. """
    values = {}
    for index in range(alg.dim ** arity):
        t = []
        for _ in range(arity):
            index, i = divmod(index, alg.dim)
            t.append(i)
        value = {}
        for l in range(alg.dim):
            for b in range(1, base.dim):
                if rng.random() < density:
                    value[(l, b)] = random_rational(rng)
        values[tuple(reversed(t))] = value
    return Cochain(arity, alg.dim, base, values, m_only=True)


def random_generator(rng, alg, base, density=0.5):
    return GaugeGenerator.associative(random_cochain(rng, 1, alg, base, density))


def random_mc_element(rng, alg, base, gauge=True, attempts=8):
    """
    MC element built order by order: at each level of the filtration basis a
    particular solution of d beta_r = -(obstruction) plus a random cocycle,
    then moved by a random gauge transformation.
    """
    filtration = base.filtration()
    solver = LinearSolver(differential_matrix(alg, 2, DEFAULT_SETTINGS.max_arity))
    for attempt in range(attempts):
        beta = Cochain.zero(2, alg.dim, base, m_only=True)
        obstructed = False
        for r in range(1, base.nilpotency):
            residual = mc_check(beta, alg, base).residual
            levels = cochain_levels(residual, filtration)
            for k in filtration.indices_at(r):
                rhs = [-x for x in levels.get(k, [ZERO] * solver.rows)]
                if not solver.is_solvable(rhs):
                    obstructed = True
                    break
                solution = solver.particular(rhs)
                for kernel_vector in solver.kernel:
                    c = QQ(rng.randint(-1, 1))
                    if c:
                        solution = [x + c * v for x, v in zip(solution, kernel_vector)]
                beta = beta + cochain_from_vector(solution, 2, alg.dim, base, filtration.vectors[k], m_only=True)
            if obstructed:
                break
        if obstructed:
            LOGGER.debug(f"Attempt {attempt}: obstructed order, retrying")
            continue
        if gauge:
            beta = gauge_act(exp_gauge(random_generator(rng, alg, base)), beta, alg, base)
        return beta
    LOGGER.warning("Every attempt was obstructed; falling back to beta = 0")
    return Cochain.zero(2, alg.dim, base, m_only=True)


def random_derivation(rng, alg, base, word_bound, degree, lengths=None, m_valued=False, density=0.5):
    """ Homogeneous derivation whose values never raise polydegree. """
    lengths = lengths or range(1, word_bound + 1)
    b_range = range(1, base.dim) if m_valued else range(base.dim)
    values = {}
    for block in all_blocks(alg.dim, word_bound):
        target = 1 - len(block) + degree
        if len(block) not in lengths or target > 0 or not b_range:
            continue
        chain = {}
        for word in enumerate_words(alg.dim, len(block), target):
            if rng.random() < density:
                chain[(word, rng.choice(b_range))] = random_rational(rng)
        values[block] = chain
    return Derivation(degree, base, word_bound, values, m_valued)


def seeded(seed):
    return random.Random(seed)
