import itertools
import logging
from dataclasses import dataclass, field

from .algebra import FiniteAlgebra, ground_field
from .barcobar import (
    CobarWord,
    GeneratorCache,
    apply_derivation,
    assemble_complex,
    generator_differential,
    merge_terms,
    multiply_chains,
    project_chain,
)
from .config import DEFAULT_SETTINGS
from .errors import ContractError, DeformationError, InputError, TruncationError
from .exact import ONE, ZERO, SparseMatrix, accumulate, quotient_space
from .hochschild import Cochain, Coderivation, mc_check, product_cochain, shift

LOGGER = logging.getLogger(__name__)


def all_blocks(dim, max_length):
    for n in range(1, max_length + 1):
        yield from itertools.product(range(dim), repeat=n)


# --- DERIVATIONS OF R_B ---

@dataclass(frozen=True, eq=False)
class Derivation:
    """
    A derivation of the cobar algebra R_B, given by its values on the generator
    blocks of length <= word_bound (missing blocks map to zero).
    """
    degree: int
    base: object
    word_bound: int
    generator_values: dict = field(default_factory=dict)
    m_valued: bool = False

    def __post_init__(self):
        cleaned = {}
        for block, chain in self.generator_values.items():
            block = tuple(block)
            if not block or len(block) > self.word_bound:
                raise InputError(f"Generator {block} outside the word bound {self.word_bound}")
            chain = {key: c for key, c in chain.items() if c}
            expected = 1 - len(block) + self.degree
            for (word, b), c in chain.items():
                if word.degree != expected:
                    raise InputError(
                        f"Value word {word.blocks} on {block} has degree {word.degree}, expected {expected}"
                    )
                if not 0 <= b < self.base.dim:
                    raise InputError(f"Bad B-index {b}")
                if self.m_valued and b == 0:
                    raise InputError(f"Value on {block} has a coefficient outside R (x) m")
            if chain:
                cleaned[block] = chain
        object.__setattr__(self, "generator_values", cleaned)

    def on_generator(self, block):
        return self.generator_values.get(tuple(block), {})

    def apply(self, chain):
        out = apply_derivation(chain, self.degree, self.on_generator, self.base)
        for word, _ in out:
            if word.polydegree > self.word_bound:
                raise TruncationError(f"Derivation output {word.blocks} exceeds the word bound {self.word_bound}")
        return out

    def is_zero(self):
        return not self.generator_values

    def is_polydegree_preserving(self):
        return all(
            word.polydegree <= len(block)
            for block, chain in self.generator_values.items()
            for word, _ in chain
        )

    def scaled(self, factor):
        values = {g: {k: c * factor for k, c in chain.items()} for g, chain in self.generator_values.items()}
        return Derivation(self.degree, self.base, self.word_bound, values, self.m_valued)

    def __add__(self, other):
        if self.degree != other.degree or self.base != other.base:
            raise InputError("Cannot add derivations of different degrees or bases")
        values = {g: dict(chain) for g, chain in self.generator_values.items()}
        for g, chain in other.generator_values.items():
            target = values.setdefault(g, {})
            for key, c in chain.items():
                accumulate(target, key, c)
        return Derivation(
            self.degree,
            self.base,
            max(self.word_bound, other.word_bound),
            values,
            self.m_valued and other.m_valued,
        )

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return (
            self.degree == other.degree
            and self.base == other.base
            and self.generator_values == other.generator_values
        )

    __hash__ = None


def resolution_differential(alg, base=None, word_bound=3, beta=None):
    """ s (with the product alpha + beta when beta is given) on every generator of length <= W. """
    base = base or ground_field()
    product = product_cochain(alg, base)
    if beta is not None:
        product = product + beta
    values = {block: generator_differential(block, product) for block in all_blocks(alg.dim, word_bound)}
    return Derivation(1, base, word_bound, values)


def derivation_bracket(first, second, dim, max_length=None):
    """ [D1, D2] = D1 D2 - (-1)^(|D1||D2|) D2 D1, evaluated on generators of length <= max_length. """
    if first.base != second.base:
        raise InputError("Derivations over different bases")
    max_length = max_length or min(first.word_bound, second.word_bound)
    negate = first.degree * second.degree % 2 == 0
    values = {}
    for block in all_blocks(dim, max_length):
        generator = {(CobarWord.generator(block), 0): ONE}
        value = first.apply(second.apply(generator))
        for key, c in second.apply(first.apply(generator)).items():
            accumulate(value, key, -c if negate else c)
        if value:
            values[block] = value
    return Derivation(
        first.degree + second.degree,
        first.base,
        max(first.word_bound, second.word_bound),
        values,
        first.m_valued or second.m_valued,
    )


def d_rel(theta, alg):
    """ The tangent differential theta -> [s, theta]. """
    s = resolution_differential(alg, theta.base, theta.word_bound)
    return derivation_bracket(s, theta, alg.dim, theta.word_bound)


# --- DEFORMED DIFFERENTIALS ---

def delta_of_beta(beta, alg, base, word_bound):
    """ The merge part of the differential with every adjacent product taken by beta alone. """
    if not mc_check(beta, alg, base).is_mc:
        raise ContractError("delta_of_beta needs a Maurer-Cartan element")
    values = {block: merge_terms(block, beta) for block in all_blocks(alg.dim, word_bound)}
    return Derivation(1, base, word_bound, values, m_valued=True)


def _require_deformation(delta, alg, base):
    if delta.degree != 1:
        raise InputError(f"A deformation of the relations has degree 1, got {delta.degree}")
    if not delta.m_valued:
        raise InputError("A deformation of the relations must take values in R (x) m")
    if delta.base != base:
        raise InputError("Derivation is over a different base")


def perturbed_differential(delta, alg, base):
    """ s + delta as a (memoized) map on generator blocks. """
    product = product_cochain(alg, base)

    def on_generator(block):
        value = generator_differential(block, product)
        for key, c in delta.on_generator(block).items():
            accumulate(value, key, c)
        return value

    return GeneratorCache(on_generator)


@dataclass(frozen=True)
class MCRelReport:
    is_mc: bool
    residual: dict
    complex: object = None


def mc_rel_check(delta, alg, base, word_bound):
    """ (s + delta)^2 = 0 as matrices on polydegree <= W; residual maps degree i to d_(i+1) d_i. """
    _require_deformation(delta, alg, base)
    complex_ = assemble_complex(alg.dim, word_bound, base, perturbed_differential(delta, alg, base))
    residual = complex_.square_defects()
    LOGGER.info(f"mc_rel_check at W={word_bound}: {len(residual)} degrees with nonzero (s+delta)^2")
    return MCRelReport(not residual, residual, complex_)


# --- H^0 ---

@dataclass(frozen=True)
class H0Result:
    """ H^0(R_B, s + delta) in the basis of classes of up(e_i) (x) b, indexed i * dim B + b. """
    dimension: int
    section: list
    product: FiniteAlgebra
    b_action: list
    reduction: SparseMatrix
    word_bound: int


def _basis_cells(alg, base):
    return [(CobarWord.generator((i,)), b) for i in range(alg.dim) for b in range(base.dim)]


def h0_compute(delta, alg, base, word_bound):
    if word_bound < 3:
        raise InputError(f"H^0 products need a word bound of at least 3, got {word_bound}")
    report = mc_rel_check(delta, alg, base, word_bound)
    if not report.is_mc:
        raise ContractError("(s + delta)^2 != 0; H^0 is only defined for deformations of the relations")
    complex_ = report.complex

    # Columns ordered by descending polydegree so pivots land on long words.
    cells = complex_.cells(0)
    ordered = sorted(range(len(cells)), key=lambda k: (-cells[k][0].polydegree, k))
    rank_of = {k: p for p, k in enumerate(ordered)}
    position = {cells[k]: p for k, p in rank_of.items()}
    relations = complex_.differential_matrices[-1]
    gens = []
    for col in range(relations.cols):
        gens.append({rank_of[row]: value for row, value in relations.column(col).items()})
    quotient = quotient_space(len(cells), gens)

    section = [cells[ordered[j]] for j in quotient.section]
    basis = _basis_cells(alg, base)
    if sorted(position[cell] for cell in basis) != list(quotient.section):
        raise DeformationError("Classes of polydegree-1 words do not form a basis of H^0")
    LOGGER.info(f"H^0 at W={word_bound}: dimension {quotient.dimension} over k")

    coordinate = {position[cell]: k for k, cell in enumerate(basis)}

    def coordinates(chain):
        vector = {}
        for cell, c in chain.items():
            accumulate(vector, position[cell], c)
        reduced = quotient.reduce(vector)
        out = [ZERO] * len(basis)
        for p, c in reduced.items():
            out[coordinate[p]] = c
        return out

    n = len(basis)
    constants = [[None] * n for _ in range(n)]
    for u, (left, b1) in enumerate(basis):
        for v, (right, b2) in enumerate(basis):
            chain = multiply_chains({(left, b1): ONE}, {(right, b2): ONE}, base)
            constants[u][v] = coordinates(chain)
    names = tuple(f"{a}*{b}" for a in alg.basis_names for b in base.basis_names)
    product = FiniteAlgebra(n, names, constants)

    b_action = []
    for c in range(base.dim):
        columns = []
        for word, b in basis:
            image = {(word, b2): s for b2, s in base.table[b][c].items()}
            columns.append({k: x for k, x in enumerate(coordinates(image)) if x})
        b_action.append(SparseMatrix.from_columns(n, columns))

    reduction = SparseMatrix(alg.dim, n, {(word.letters[0], k): ONE for k, (word, b) in enumerate(basis) if b == 0})
    return H0Result(quotient.dimension, section, product, b_action, reduction, word_bound)


# --- COMPARISON WITH COCHAINS ---

def project_derivation(theta, alg, max_arity=DEFAULT_SETTINGS.max_arity):
    """
    Hom(up BA, R) -> Hom(up BA, A) -> Coder(BA): p on the values of theta; only
    generators of length |theta| + 1 have degree-0 values.
    """
    arity = theta.degree + 1
    if arity < 1:
        return Coderivation({}, max_arity)
    values = {}
    for block, chain in theta.generator_values.items():
        if len(block) == arity:
            value = project_chain(chain, alg)
            if value:
                values[block] = value
    return Coderivation({arity: shift(Cochain(arity, alg.dim, theta.base, values))}, max_arity)


def projected_cochain(theta, alg):
    """ project_derivation read back in the algebra picture. """
    arity = max(theta.degree + 1, 1)
    return project_derivation(theta, alg).cochain(arity, alg.dim, theta.base)
