import logging
from dataclasses import dataclass, field

from sympy import QQ
from sympy.polys.matrices.sdm import sdm_irref

from .errors import InputError

LOGGER = logging.getLogger(__name__)

ZERO = QQ(0)
ONE = QQ(1)


# --- SCALARS ---

def rational(value):
    """ Coerces ints, "p/q" strings and field elements into QQ. """
    if isinstance(value, str):
        numerator, _, denominator = value.strip().partition("/")
        try:
            return QQ(int(numerator), int(denominator) if denominator else 1)
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"Not a rational number: {value!r}") from e
    if isinstance(value, bool):
        raise InputError(f"Not a rational number: {value!r}")
    if isinstance(value, int):
        return QQ(value)
    try:
        return QQ.convert(value)
    except Exception as e:
        raise InputError(f"Not a rational number: {value!r}") from e


def format_rational(value):
    value = QQ.convert(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def accumulate(target, key, value):
    """ target[key] += value, dropping the key when the sum cancels. """
    current = target.get(key)
    total = value if current is None else current + value
    if total:
        target[key] = total
    elif key in target:
        del target[key]


def weighted_sum(weights, values, zero=ZERO):
    """ Sum of values[j] * w over the sparse weights {j: w}; values may be polynomials. """
    total = zero
    for j, w in weights.items():
        v = values[j]
        if v:
            total = total + v * w
    return total


# --- MATRICES ---

@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise InputError(f"Negative matrix shape {self.rows}x{self.cols}")
        cleaned = {}
        for (i, j), value in self.entries.items():
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise InputError(f"Entry ({i}, {j}) outside a {self.rows}x{self.cols} matrix")
            value = QQ.convert(value)
            if value:
                cleaned[(i, j)] = value
        object.__setattr__(self, "entries", cleaned)

    @classmethod
    def from_dense(cls, rows):
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise InputError("Ragged matrix rows")
        entries = {}
        for i, row in enumerate(rows):
            for j, value in enumerate(row):
                value = rational(value)
                if value:
                    entries[(i, j)] = value
        return cls(len(rows), ncols, entries)

    @classmethod
    def from_columns(cls, nrows, columns):
        """ Columns given as sparse dicts {row: value}. """
        entries = {}
        for j, column in enumerate(columns):
            for i, value in column.items():
                entries[(i, j)] = value
        return cls(nrows, len(columns), entries)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): ONE for i in range(n)})

    def to_dod(self):
        dod = {}
        for (i, j), value in self.entries.items():
            dod.setdefault(i, {})[j] = value
        return dod

    def to_dense(self):
        dense = [[ZERO] * self.cols for _ in range(self.rows)]
        for (i, j), value in self.entries.items():
            dense[i][j] = value
        return dense

    def column(self, j):
        return {i: v for (i, jj), v in self.entries.items() if jj == j}

    def matvec(self, vector):
        if len(vector) != self.cols:
            raise InputError(f"Vector of length {len(vector)} for a matrix with {self.cols} columns")
        out = [ZERO] * self.rows
        for (i, j), value in self.entries.items():
            if vector[j]:
                out[i] = out[i] + value * vector[j]
        return out

    def matmul(self, other):
        if self.cols != other.rows:
            raise InputError(f"Cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        right = other.to_dod()
        entries = {}
        for (i, k), value in self.entries.items():
            for j, other_value in right.get(k, {}).items():
                accumulate(entries, (i, j), value * other_value)
        return SparseMatrix(self.rows, other.cols, entries)

    def __sub__(self, other):
        entries = dict(self.entries)
        for key, value in other.entries.items():
            accumulate(entries, key, -value)
        return SparseMatrix(self.rows, self.cols, entries)

    def is_zero(self):
        return not self.entries

    @property
    def nnz(self):
        return len(self.entries)


# --- ROW REDUCTION ---

def row_reduce(dod):
    """ RREF of a dict-of-dicts matrix; returns ({k: pivot row k}, pivots). """
    nonzero = {i: dict(row) for i, row in dod.items() if row}
    if not nonzero:
        return {}, []
    reduced, pivots, _ = sdm_irref(nonzero)
    return reduced, list(pivots)


def rank(matrix):
    if isinstance(matrix, SparseMatrix):
        dod = matrix.to_dod()
    else:
        dod = _rows_to_dod(matrix)
    return len(row_reduce(dod)[1])


def _rows_to_dod(vectors):
    dod = {}
    for i, vector in enumerate(vectors):
        row = {j: QQ.convert(v) for j, v in enumerate(vector) if v}
        if row:
            dod[i] = row
    return dod


def _kernel_from_rref(reduced, pivots, ncols):
    pivot_set = set(pivots)
    basis = []
    for j in range(ncols):
        if j in pivot_set:
            continue
        vector = [ZERO] * ncols
        vector[j] = ONE
        for k, p in enumerate(pivots):
            value = reduced[k].get(j)
            if value:
                vector[p] = -value
        basis.append(vector)
    return basis


def kernel_basis(m):
    reduced, pivots = row_reduce(m.to_dod())
    return _kernel_from_rref(reduced, pivots, m.cols)


@dataclass(frozen=True)
class LinearSolution:
    particular: list
    kernel_basis: list


def solve_linear(m, rhs):
    """ Returns a LinearSolution, or None when m x = rhs has no solution. """
    if len(rhs) != m.rows:
        raise InputError(f"Right-hand side of length {len(rhs)} for {m.rows} equations")
    augmented = m.to_dod()
    for i, value in enumerate(rhs):
        value = QQ.convert(value)
        if value:
            augmented.setdefault(i, {})[m.cols] = value
    reduced, pivots = row_reduce(augmented)
    if pivots and pivots[-1] == m.cols:
        return None
    particular = [ZERO] * m.cols
    for k, p in enumerate(pivots):
        particular[p] = reduced[k].get(m.cols, ZERO)
    return LinearSolution(particular, kernel_basis(m))


def inverse(m):
    if m.rows != m.cols:
        raise InputError(f"Cannot invert a {m.rows}x{m.cols} matrix")
    solver = LinearSolver(m)
    if solver.rank != m.cols:
        raise InputError("Matrix is singular")
    columns = []
    for j in range(m.rows):
        unit = [ZERO] * m.rows
        unit[j] = ONE
        columns.append({i: v for i, v in enumerate(solver.particular(unit)) if v})
    return SparseMatrix.from_columns(m.rows, columns)


class LinearSolver:
    """
    Prepared solver for m x = b with a symbolic right-hand side.

    The rows of rref([m | I]) split into pivot rows, which express x through b,
    and condition rows, linear functionals of b that vanish exactly when the
    system is solvable. Both only multiply b by field elements, so b may hold
    polynomials in free parameters.
    """

    def __init__(self, m):
        self.rows = m.rows
        self.cols = m.cols
        augmented = m.to_dod()
        for i in range(m.rows):
            augmented.setdefault(i, {})[m.cols + i] = ONE
        reduced, pivots = row_reduce(augmented)

        self._pivot_rows = []
        self._conditions = []
        left_reduced = {}
        left_pivots = []
        for k, p in enumerate(pivots):
            row = reduced[k]
            right = {j - m.cols: v for j, v in row.items() if j >= m.cols}
            if p < m.cols:
                self._pivot_rows.append((p, right))
                left_reduced[len(left_pivots)] = {j: v for j, v in row.items() if j < m.cols}
                left_pivots.append(p)
            else:
                self._conditions.append(right)
        self.rank = len(left_pivots)
        self.kernel = _kernel_from_rref(left_reduced, left_pivots, m.cols)
        LOGGER.debug(f"Prepared {m.rows}x{m.cols} solver: rank {self.rank}, {len(self._conditions)} conditions")

    def conditions(self, rhs, zero=ZERO):
        self._check(rhs)
        return [weighted_sum(functional, rhs, zero) for functional in self._conditions]

    def is_solvable(self, rhs):
        return not any(self.conditions(rhs))

    def particular(self, rhs, zero=ZERO):
        """ A solution (free variables set to zero), valid when all conditions vanish. """
        self._check(rhs)
        solution = [zero] * self.cols
        for p, functional in self._pivot_rows:
            solution[p] = weighted_sum(functional, rhs, zero)
        return solution

    def _check(self, rhs):
        if len(rhs) != self.rows:
            raise InputError(f"Right-hand side of length {len(rhs)} for {self.rows} equations")


# --- QUOTIENTS ---

@dataclass(frozen=True)
class QuotientSpace:
    ambient_dim: int
    reduced_rows: dict
    pivots: tuple

    @property
    def dimension(self):
        return self.ambient_dim - len(self.pivots)

    @property
    def section(self):
        """ Ambient indices whose classes form a basis of the quotient. """
        pivot_set = set(self.pivots)
        return [j for j in range(self.ambient_dim) if j not in pivot_set]

    def reduce(self, vector):
        """ Normal form of a sparse vector {index: value}: supported on the section only. """
        result = dict(vector)
        for k, p in enumerate(self.pivots):
            coefficient = result.get(p)
            if not coefficient:
                continue
            for j, value in self.reduced_rows[k].items():
                accumulate(result, j, -coefficient * value)
        return result


def quotient_space(ambient_dim, subspace_gens):
    dod = {}
    for i, generator in enumerate(subspace_gens):
        if isinstance(generator, dict):
            row = {j: QQ.convert(v) for j, v in generator.items() if v}
        else:
            if len(generator) != ambient_dim:
                raise InputError(f"Generator of length {len(generator)} in a space of dimension {ambient_dim}")
            row = {j: QQ.convert(v) for j, v in enumerate(generator) if v}
        if row:
            dod[i] = row
    reduced, pivots = row_reduce(dod)
    return QuotientSpace(ambient_dim, reduced, tuple(pivots))


def quotient_dimension(ambient_dim, subspace_gens):
    return quotient_space(ambient_dim, subspace_gens).dimension
