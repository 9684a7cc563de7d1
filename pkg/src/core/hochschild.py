import itertools
import logging
from dataclasses import dataclass

from sympy import QQ

from .algebra import check_associative, extend_scalars, ground_field
from .config import DEFAULT_SETTINGS
from .errors import DeformationError, InputError, TruncationError
from .exact import ONE, ZERO, SparseMatrix, accumulate, rank

LOGGER = logging.getLogger(__name__)


def tuple_index(indices, dim):
    index = 0
    for i in indices:
        index = index * dim + i
    return index


def _prune(values):
    cleaned = {}
    for key, value in values.items():
        value = {k: c for k, c in value.items() if c}
        if value:
            cleaned[tuple(key)] = value
    return cleaned


# --- COCHAINS ---

class Cochain:
    """
    A B-multilinear map A_B^(x)n -> A_B, stored on basis tuples of A as sparse
    elements {(l, b): coefficient} of A (x) B. Values are the literal maps
    (product perturbations, endomorphisms); the coderivation picture is `shift`.
    """

    def __init__(self, arity, dim, base, values=None, m_only=False):
        if arity < 1:
            raise InputError(f"Cochain arity must be >= 1, got {arity}")
        self.arity = arity
        self.dim = dim
        self.base = base
        self.values = _prune(values or {})
        self.m_only = m_only
        for key, value in self.values.items():
            if len(key) != arity or any(not 0 <= i < dim for i in key):
                raise InputError(f"Bad cochain input {key} for arity {arity} over a {dim}-dimensional algebra")
            for l, b in value:
                if not (0 <= l < dim and 0 <= b < base.dim):
                    raise InputError(f"Bad cochain output index ({l}, {b})")
                if m_only and b == 0:
                    raise InputError(f"Value at {key} has a component outside A (x) m")

    @classmethod
    def zero(cls, arity, dim, base, m_only=False):
        return cls(arity, dim, base, {}, m_only)

    def evaluate(self, indices):
        return self.values.get(tuple(indices), {})

    def is_zero(self):
        return not self.values

    def is_m_valued(self):
        return all(b != 0 for value in self.values.values() for _, b in value)

    def map_coefficients(self, fn):
        values = {key: {k: fn(c) for k, c in value.items()} for key, value in self.values.items()}
        return Cochain(self.arity, self.dim, self.base, values, self.m_only)

    def with_m_only(self, flag=True):
        return Cochain(self.arity, self.dim, self.base, self.values, flag)

    def scaled(self, factor):
        return Cochain(
            self.arity,
            self.dim,
            self.base,
            {key: {k: c * factor for k, c in value.items()} for key, value in self.values.items()},
            self.m_only,
        )

    def __neg__(self):
        return self.map_coefficients(lambda c: -c)

    def __add__(self, other):
        _check_compatible(self, other, same_arity=True)
        values = {key: dict(value) for key, value in self.values.items()}
        for key, value in other.values.items():
            target = values.setdefault(key, {})
            for k, c in value.items():
                accumulate(target, k, c)
        return Cochain(self.arity, self.dim, self.base, values, self.m_only and other.m_only)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.dim == other.dim
            and self.base == other.base
            and self.values == other.values
        )

    __hash__ = None

    def __repr__(self):
        return f"Cochain(arity={self.arity}, dim={self.dim}, values={self.values})"


def _check_compatible(f, g, same_arity=False):
    if f.dim != g.dim or f.base != g.base:
        raise InputError("Cochains live over different algebras or bases")
    if same_arity and f.arity != g.arity:
        raise InputError(f"Cannot add cochains of arity {f.arity} and {g.arity}")


def product_cochain(alg, base):
    """ alpha as an arity-2 cochain over base. """
    values = {
        (i, j): {(l, 0): c for l, c in alg.table[i][j].items()}
        for i, j in itertools.product(range(alg.dim), repeat=2)
    }
    return Cochain(2, alg.dim, base, values)


def identity_cochain(dim, base, one=ONE):
    return Cochain(1, dim, base, {(i,): {(i, 0): one} for i in range(dim)})


def shift(c):
    """ Passes between the algebra picture and coderivation components: c -> (-1)^(n-1) c. """
    return c if c.arity % 2 == 1 else -c


unshift = shift


def outputs_by_letter(g):
    by_letter = {}
    for t, value in g.values.items():
        for (l, b), c in value.items():
            by_letter.setdefault(l, []).append((t, b, c))
    return by_letter


def circle(f, g):
    """ f o g = sum_i (-1)^((q-1) i) f(a_1, ..., a_i, g(...), ...); composition when f has arity 1. """
    _check_compatible(f, g)
    table = f.base.table
    by_letter = outputs_by_letter(g)
    out = {}
    for s, fv in f.values.items():
        for i, letter in enumerate(s):
            negate = (g.arity - 1) * i % 2 == 1
            for t, b, c in by_letter.get(letter, ()):
                target = out.setdefault(s[:i] + t + s[i + 1:], {})
                for (l2, b2), c2 in fv.items():
                    for b3, st in table[b2][b].items():
                        term = c2 * c * st
                        accumulate(target, (l2, b3), -term if negate else term)
    return Cochain(f.arity + g.arity - 1, f.dim, f.base, out, f.m_only or g.m_only)


def compose(f, g):
    """ Composition of arity-1 cochains (B-linear endomorphisms of A_B). """
    if f.arity != 1:
        raise InputError("compose expects an arity-1 outer map")
    return circle(f, g)


def bracket_components(f, g):
    """ Graded commutator of two coderivation components: f o g - (-1)^((p-1)(q-1)) g o f. """
    if (f.arity - 1) * (g.arity - 1) % 2 == 0:
        return circle(f, g) - circle(g, f)
    return circle(f, g) + circle(g, f)


# --- CODERIVATIONS ---

@dataclass(frozen=True)
class Coderivation:
    """ Coderivation of the bar coalgebra, kept as its components Hom(M^(x)n, M) by arity. """
    components: dict
    max_arity: int = DEFAULT_SETTINGS.max_arity

    def __post_init__(self):
        kept = {}
        for arity, component in self.components.items():
            if component.arity != arity:
                raise InputError(f"Component stored at arity {arity} has arity {component.arity}")
            if arity > self.max_arity:
                raise TruncationError(f"Component of arity {arity} exceeds the truncation bound {self.max_arity}")
            if not component.is_zero():
                kept[arity] = component
        object.__setattr__(self, "components", kept)

    def component(self, arity):
        return self.components.get(arity)

    def cochain(self, arity, dim, base):
        """ Algebra-picture cochain of the given arity (zero if absent). """
        component = self.components.get(arity)
        if component is None:
            return Cochain.zero(arity, dim, base)
        return unshift(component)

    def is_zero(self):
        return not self.components

    def scaled(self, factor):
        return Coderivation({a: c.scaled(factor) for a, c in self.components.items()}, self.max_arity)

    def __add__(self, other):
        out = dict(self.components)
        for arity, component in other.components.items():
            out[arity] = out[arity] + component if arity in out else component
        return Coderivation(out, min(self.max_arity, other.max_arity))

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)


def gerstenhaber_bracket(p, q):
    bound = min(p.max_arity, q.max_arity)
    out = {}
    for a, f in p.components.items():
        for b, g in q.components.items():
            arity = a + b - 1
            if arity > bound:
                raise TruncationError(f"Bracket of arities {a} and {b} needs arity {arity} > {bound}")
            term = bracket_components(f, g)
            out[arity] = out[arity] + term if arity in out else term
    return Coderivation(out, bound)


def bar_codifferential(alg, base=None, max_arity=DEFAULT_SETTINGS.max_arity):
    """ Q with the single component Q_2(a, b) = -ab. """
    base = base or ground_field()
    return Coderivation({2: shift(product_cochain(alg, base))}, max_arity)


def hochschild_differential(c, alg, max_arity=DEFAULT_SETTINGS.max_arity):
    """ d c = [Q, c] read back in the algebra picture. """
    if c.dim != alg.dim:
        raise InputError(f"Cochain over a {c.dim}-dimensional algebra, algebra has dimension {alg.dim}")
    if c.arity + 1 > max_arity:
        raise TruncationError(f"d of an arity-{c.arity} cochain exceeds the truncation bound {max_arity}")
    q = bar_codifferential(alg, c.base, max_arity)
    bracket = gerstenhaber_bracket(q, Coderivation({c.arity: shift(c)}, max_arity))
    return bracket.cochain(c.arity + 1, c.dim, c.base).with_m_only(c.m_only)


# --- MAURER-CARTAN ---

@dataclass(frozen=True)
class MCReport:
    is_mc: bool
    residual: Cochain


def _require_deformation(beta, alg, base):
    if beta.arity != 2:
        raise InputError(f"A product deformation has arity 2, got {beta.arity}")
    if beta.dim != alg.dim or beta.base != base:
        raise InputError("Cochain does not match the algebra and base")
    if not beta.is_m_valued():
        raise InputError("A product deformation must take values in A (x) m")


def mc_check(beta, alg, base, max_arity=DEFAULT_SETTINGS.max_arity):
    """ d beta + 1/2 [beta, beta] = 0, cross-checked against associativity of alpha + beta. """
    _require_deformation(beta, alg, base)
    q = bar_codifferential(alg, base, max_arity)
    shifted = Coderivation({2: shift(beta)}, max_arity)
    residual = gerstenhaber_bracket(q, shifted) + gerstenhaber_bracket(shifted, shifted).scaled(QQ(1, 2))
    residual = residual.cochain(3, alg.dim, base)
    is_mc = residual.is_zero()

    deformed = extend_scalars(alg, base, (product_cochain(alg, base) + beta).values)
    if check_associative(deformed).associative != is_mc:
        raise DeformationError("Maurer-Cartan residual disagrees with associativity of the deformed product")
    LOGGER.debug(f"mc_check: residual has {len(residual.values)} nonzero values")
    return MCReport(is_mc, residual)


def deformed_product(beta, alg, base):
    return product_cochain(alg, base) + beta


# --- COHOMOLOGY ---

def basis_cochain(arity, dim, index, base=None):
    """ The ground-field cochain dual to coordinate `index` = tuple_index(t) * dim + l. """
    base = base or ground_field()
    flat, l = divmod(index, dim)
    t = []
    for _ in range(arity):
        flat, i = divmod(flat, dim)
        t.append(i)
    return Cochain(arity, dim, base, {tuple(reversed(t)): {(l, 0): ONE}})


def cochain_vector(c):
    """ Coordinates of a ground-field cochain, indexed by tuple_index(t) * dim + l. """
    vector = [ZERO] * (c.dim ** (c.arity + 1))
    for t, value in c.values.items():
        for (l, b), coefficient in value.items():
            if b != 0:
                raise InputError("cochain_vector expects a cochain over the ground field")
            vector[tuple_index(t, c.dim) * c.dim + l] = coefficient
    return vector


def cochain_levels(c, filtration, zero=ZERO):
    """ Splits c along the adapted basis of B: {k: coordinate vector of the B-component v_k}. """
    size = c.dim ** (c.arity + 1)
    levels = {}
    for t, value in c.values.items():
        by_letter = {}
        for (l, b), coefficient in value.items():
            by_letter.setdefault(l, {})[b] = coefficient
        for l, element in by_letter.items():
            for k, x in enumerate(filtration.coordinates(element, zero)):
                if x:
                    levels.setdefault(k, [zero] * size)[tuple_index(t, c.dim) * c.dim + l] = x
    return levels


def cochain_from_vector(vector, arity, dim, base, b_vector, m_only=False):
    """ Cochain sum_idx vector[idx] * (basis cochain idx) (x) b_vector, b_vector = {b: coefficient}. """
    values = {}
    for index, x in enumerate(vector):
        if not x:
            continue
        flat, l = divmod(index, dim)
        t = []
        for _ in range(arity):
            flat, i = divmod(flat, dim)
            t.append(i)
        target = values.setdefault(tuple(reversed(t)), {})
        for b, s in b_vector.items():
            accumulate(target, (l, b), x * s)
    return Cochain(arity, dim, base, values, m_only)


def differential_matrix(alg, n, max_arity=DEFAULT_SETTINGS.max_arity):
    """ k-matrix of d: C^n -> C^(n+1) in the cochain_vector coordinates. """
    columns = []
    for index in range(alg.dim ** (n + 1)):
        image = hochschild_differential(basis_cochain(n, alg.dim, index), alg, max_arity)
        columns.append({i: v for i, v in enumerate(cochain_vector(image)) if v})
    LOGGER.debug(f"Assembled d: C^{n} -> C^{n + 1} for a {alg.dim}-dimensional algebra")
    return SparseMatrix.from_columns(alg.dim ** (n + 2), columns)


def hh_dimension(alg, n, max_arity=DEFAULT_SETTINGS.max_arity):
    if n < 1:
        raise InputError(f"Hochschild degree must be >= 1, got {n}")
    if n + 1 > max_arity:
        raise TruncationError(f"HH^{n} needs C^{n + 1}, beyond the truncation bound {max_arity}")
    cocycles = alg.dim ** (n + 1) - rank(differential_matrix(alg, n, max_arity))
    coboundaries = rank(differential_matrix(alg, n - 1, max_arity)) if n >= 2 else 0
    LOGGER.info(f"HH^{n}: {cocycles} cocycles, {coboundaries} coboundaries")
    return cocycles - coboundaries


def endomorphism_matrix(c):
    """ k-matrix of the B-linear endomorphism of A_B given by an arity-1 cochain, coordinates l * dim B + b. """
    if c.arity != 1:
        raise InputError("Only arity-1 cochains are endomorphisms")
    base = c.base
    n = c.dim * base.dim
    entries = {}
    for (i,), value in c.values.items():
        for b in range(base.dim):
            for (l, b1), coefficient in value.items():
                for b2, s in base.table[b1][b].items():
                    accumulate(entries, (l * base.dim + b2, i * base.dim + b), coefficient * s)
    return SparseMatrix(n, n, entries)
