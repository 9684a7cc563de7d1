import itertools
import logging
from dataclasses import dataclass
from functools import cached_property

from .errors import InputError
from .exact import (
    ONE,
    ZERO,
    SparseMatrix,
    accumulate,
    inverse,
    rational,
    row_reduce,
)

LOGGER = logging.getLogger(__name__)


def _freeze_constants(dim, constants):
    if len(constants) != dim:
        raise InputError(f"Structure constants have {len(constants)} rows, expected {dim}")
    frozen = []
    for i, row in enumerate(constants):
        if len(row) != dim:
            raise InputError(f"Row {i} of the structure constants has {len(row)} entries, expected {dim}")
        frozen_row = []
        for j, product in enumerate(row):
            if len(product) != dim:
                raise InputError(f"Product e{i}*e{j} has {len(product)} coordinates, expected {dim}")
            frozen_row.append(tuple(rational(c) for c in product))
        frozen.append(tuple(frozen_row))
    return tuple(frozen)


def _sparse_table(dim, constants):
    return [[{l: c for l, c in enumerate(constants[i][j]) if c} for j in range(dim)] for i in range(dim)]


def zero_constants(dim):
    return [[[ZERO] * dim for _ in range(dim)] for _ in range(dim)]


# --- THE ALGEBRA A ---

@dataclass(frozen=True)
class FiniteAlgebra:
    """ A finite-dimensional, not necessarily unital k-algebra given by e_i e_j = sum_l c[i][j][l] e_l. """
    dim: int
    basis_names: tuple
    structure_constants: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"Algebra dimension must be positive, got {self.dim}")
        if len(self.basis_names) != self.dim:
            raise InputError(f"{len(self.basis_names)} basis names for dimension {self.dim}")
        object.__setattr__(self, "basis_names", tuple(str(n) for n in self.basis_names))
        object.__setattr__(self, "structure_constants", _freeze_constants(self.dim, self.structure_constants))

    @cached_property
    def table(self):
        return _sparse_table(self.dim, self.structure_constants)

    def multiply(self, u, v):
        """ Product of sparse vectors {index: coefficient}. """
        out = {}
        for i, a in u.items():
            for j, b in v.items():
                for l, c in self.table[i][j].items():
                    accumulate(out, l, a * b * c)
        return out


@dataclass(frozen=True)
class AssociativityReport:
    associative: bool
    witness: tuple = None
    associator: dict = None


def check_associative(alg):
    """ Scans all basis triples; returns the first nonzero associator. """
    for i, j, l in itertools.product(range(alg.dim), repeat=3):
        left = alg.multiply(alg.table[i][j], {l: ONE})
        right = alg.multiply({i: ONE}, alg.table[j][l])
        associator = dict(left)
        for key, value in right.items():
            accumulate(associator, key, -value)
        if associator:
            return AssociativityReport(False, (i, j, l), associator)
    return AssociativityReport(True)


def require_associative(alg):
    report = check_associative(alg)
    if not report.associative:
        raise InputError(f"Algebra is not associative: associator at {report.witness} is {report.associator}")


def transport_algebra(alg, g):
    """ Rewrites alg in the basis f_i = sum_k g[k][i] e_k (the columns of g). """
    if g.rows != alg.dim or g.cols != alg.dim:
        raise InputError(f"Transport matrix must be {alg.dim}x{alg.dim}")
    g_inv = inverse(g)
    columns = [g.column(i) for i in range(alg.dim)]
    constants = zero_constants(alg.dim)
    for i, j in itertools.product(range(alg.dim), repeat=2):
        product = alg.multiply(columns[i], columns[j])
        vector = [product.get(k, ZERO) for k in range(alg.dim)]
        coordinates = g_inv.matvec(vector)
        constants[i][j] = coordinates
    names = tuple(f"f{i}" for i in range(alg.dim))
    return FiniteAlgebra(alg.dim, names, constants)


# --- THE BASE (B, m) ---

@dataclass(frozen=True)
class Filtration:
    """
    Basis of B adapted to B > m > m^2 > ... : vectors[k] lies in m^levels[k] and
    the vectors of level >= r span m^r.
    """
    vectors: tuple
    levels: tuple
    _to_adapted: SparseMatrix

    def coordinates(self, element, zero=ZERO):
        """ Adapted coordinates of {b: coefficient}; coefficients may be polynomials. """
        out = [zero] * len(self.vectors)
        for (k, b), value in self._to_adapted.entries.items():
            c = element.get(b)
            if c:
                out[k] = out[k] + c * value
        return out

    def indices_at(self, level):
        return [k for k, r in enumerate(self.levels) if r == level]


@dataclass(frozen=True)
class ArtinLocalAlgebra:
    """ Commutative local k-algebra with unit e_0 and maximal ideal spanned by e_1, ..., e_{dim-1}. """
    dim: int
    basis_names: tuple
    structure_constants: tuple
    nilpotency: int
    unit_index: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError(f"Base dimension must be positive, got {self.dim}")
        if self.unit_index != 0:
            raise InputError(f"The unit must be basis vector 0, got unit_index {self.unit_index}")
        if len(self.basis_names) != self.dim:
            raise InputError(f"{len(self.basis_names)} basis names for dimension {self.dim}")
        object.__setattr__(self, "basis_names", tuple(str(n) for n in self.basis_names))
        object.__setattr__(self, "structure_constants", _freeze_constants(self.dim, self.structure_constants))

    @cached_property
    def table(self):
        return _sparse_table(self.dim, self.structure_constants)

    def multiply(self, u, v):
        out = {}
        for b1, a in u.items():
            for b2, c in v.items():
                for b, s in self.table[b1][b2].items():
                    accumulate(out, b, a * c * s)
        return out

    def as_algebra(self):
        return FiniteAlgebra(self.dim, self.basis_names, self.structure_constants)

    @cached_property
    def _filtration(self):
        return _build_filtration(self)

    def filtration(self):
        return self._filtration


def ground_field():
    """ k as a base: dimension 1, m = 0. """
    return ArtinLocalAlgebra(1, ("1",), [[[ONE]]], nilpotency=1)


def _span_rows(vectors, dim):
    dod = {}
    for i, v in enumerate(vectors):
        row = {b: c for b, c in v.items() if c}
        if row:
            dod[i] = row
    reduced, pivots = row_reduce(dod)
    return [reduced[k] for k in range(len(pivots))]


def _ideal_powers(base):
    """ Echelon bases of m, m^2, ... down to the first zero power (at most dim + 1 of them). """
    current = _span_rows([{b: ONE} for b in range(1, base.dim)], base.dim)
    powers = [current]
    while current and len(powers) <= base.dim:
        products = [base.multiply(u, {b: ONE}) for u in current for b in range(1, base.dim)]
        current = _span_rows(products, base.dim)
        powers.append(current)
    return powers


def _build_filtration(base):
    powers = _ideal_powers(base)
    vectors = [{0: ONE}]
    levels = [0]
    # powers[r - 1] spans m^r; extend a basis of m^{r+1} to one of m^r.
    chosen_by_level = {}
    for r in range(1, len(powers)):
        upper = powers[r]
        chosen = []
        for candidate in powers[r - 1]:
            trial = upper + chosen + [candidate]
            if len(_span_rows(trial, base.dim)) == len(trial):
                chosen.append(candidate)
        chosen_by_level[r] = chosen
    for r in sorted(chosen_by_level):
        for vector in chosen_by_level[r]:
            vectors.append(dict(vector))
            levels.append(r)
    if len(vectors) != base.dim:
        raise InputError("The maximal ideal is not nilpotent; no adapted basis exists")
    basis_matrix = SparseMatrix.from_columns(base.dim, vectors)
    return Filtration(tuple(vectors), tuple(levels), inverse(basis_matrix))


@dataclass(frozen=True)
class ArtinReport:
    valid: bool
    reason: str = ""
    nilpotency: int = None


def validate_artin(base):
    """ Checks unit, commutativity, associativity, the ideal m and the stored nilpotency index. """
    dim = base.dim
    for b in range(dim):
        unit = {b: ONE}
        if base.multiply({0: ONE}, unit) != unit or base.multiply(unit, {0: ONE}) != unit:
            return ArtinReport(False, f"basis vector 0 is not a unit (fails on {base.basis_names[b]})")
    for b1, b2 in itertools.combinations(range(dim), 2):
        if base.table[b1][b2] != base.table[b2][b1]:
            return ArtinReport(False, f"not commutative: {base.basis_names[b1]}*{base.basis_names[b2]}")
    report = check_associative(base.as_algebra())
    if not report.associative:
        return ArtinReport(False, f"not associative at {report.witness}")
    for b1, b2 in itertools.product(range(1, dim), repeat=2):
        if base.table[b1][b2].get(0):
            return ArtinReport(
                False,
                f"indices >= 1 do not span an ideal: {base.basis_names[b1]}*{base.basis_names[b2]} leaves m",
            )
    powers = _ideal_powers(base)
    if powers[-1]:
        return ArtinReport(False, "the maximal ideal is not nilpotent")
    nilpotency = len(powers)
    if nilpotency != base.nilpotency:
        return ArtinReport(
            False, f"stored nilpotency {base.nilpotency} but m^{nilpotency} is the first zero power", nilpotency
        )
    return ArtinReport(True, "", nilpotency)


def require_artin(base):
    report = validate_artin(base)
    if not report.valid:
        raise InputError(f"Invalid Artin base: {report.reason}")


# --- SCALAR EXTENSION A_B ---
# Elements of A_B are sparse dicts {(l, b): coefficient} for e_l (x) b.

def extended_index(l, b, base_dim):
    return l * base_dim + b


def extend_scalars(alg, base, product_values=None):
    """
    k-algebra A_B of dimension dim A * dim B with (e_i b)(e_j b') = gamma(e_i, e_j) b b',
    where gamma is alpha unless product_values {(i, j): element of A_B} is given.
    """
    n = alg.dim * base.dim
    constants = zero_constants(n)
    for i, j in itertools.product(range(alg.dim), repeat=2):
        if product_values is None:
            value = {(l, 0): c for l, c in alg.table[i][j].items()}
        else:
            value = product_values.get((i, j), {})
        for b1, b2 in itertools.product(range(base.dim), repeat=2):
            row = constants[extended_index(i, b1, base.dim)][extended_index(j, b2, base.dim)]
            for (l, b), c in value.items():
                for b3, s in base.table[b][b1].items():
                    for b4, t in base.table[b3][b2].items():
                        row[extended_index(l, b4, base.dim)] += c * s * t
    names = tuple(f"{a}*{b}" for a in alg.basis_names for b in base.basis_names)
    return FiniteAlgebra(n, names, constants)


def reduce_mod_m(extended, base):
    """ Structure constants of A_B / m A_B in the basis e_l (x) 1. """
    dim = extended.dim // base.dim
    constants = zero_constants(dim)
    for i, j, l in itertools.product(range(dim), repeat=3):
        constants[i][j][l] = extended.structure_constants[extended_index(i, 0, base.dim)][
            extended_index(j, 0, base.dim)
        ][extended_index(l, 0, base.dim)]
    return FiniteAlgebra(dim, tuple(f"e{i}" for i in range(dim)), constants)
