import itertools
import logging
from dataclasses import dataclass

from .algebra import FiniteAlgebra, check_associative, extend_scalars
from .config import DEFAULT_SETTINGS
from .errors import ContractError, FlatnessError, InputError
from .exact import ONE, ZERO, SparseMatrix, inverse, rank, solve_linear
from .gauge import EQUIVALENT, INCONCLUSIVE, exp_gauge, gauge_equivalent
from .hochschild import Cochain, deformed_product, mc_check

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlatDeformation:
    """
    A B-algebra (carrier over k, B acting by b_action[b], k-structure constants
    `product`) with reduction: carrier -> A identifying the fibre at m with A.
    """
    carrier_dim: int
    b_action: tuple
    product: FiniteAlgebra
    reduction: SparseMatrix

    def __post_init__(self):
        object.__setattr__(self, "b_action", tuple(self.b_action))


def _sparse(vector):
    return {k: x for k, x in enumerate(vector) if x}


def _dense(sparse, n):
    out = [ZERO] * n
    for k, x in sparse.items():
        out[k] = x
    return out


def _unit(k, n):
    out = [ZERO] * n
    out[k] = ONE
    return out


# --- VALIDATION ---

def validate_flat(t, alg, base):
    """ Structural checks; raises InputError on anything that is not a deformation of A over B. """
    n = t.carrier_dim
    if len(t.b_action) != base.dim:
        raise InputError(f"{len(t.b_action)} action matrices for a {base.dim}-dimensional base")
    for m in t.b_action:
        if m.rows != n or m.cols != n:
            raise InputError(f"Action matrices must be {n}x{n}")
    if t.product.dim != n:
        raise InputError(f"Product of dimension {t.product.dim} on a carrier of dimension {n}")
    if t.reduction.rows != alg.dim or t.reduction.cols != n:
        raise InputError(f"Reduction must be {alg.dim}x{n}")

    if t.b_action[0] != SparseMatrix.identity(n):
        raise InputError("The unit of B does not act as the identity")
    for b1, b2 in itertools.product(range(base.dim), repeat=2):
        expected = SparseMatrix(n, n, {})
        for b, s in base.table[b1][b2].items():
            expected = _add_scaled(expected, t.b_action[b], s)
        if t.b_action[b1].matmul(t.b_action[b2]) != expected:
            raise InputError(f"B does not act as a module ({base.basis_names[b1]}*{base.basis_names[b2]})")

    report = check_associative(t.product)
    if not report.associative:
        raise InputError(f"Deformed product is not associative at {report.witness}")
    for b in range(1, base.dim):
        action = t.b_action[b]
        for u, v in itertools.product(range(n), repeat=2):
            uv = _dense(t.product.table[u][v], n)
            left = action.matvec(uv)
            middle = _dense(t.product.multiply(_sparse(action.matvec(_unit(u, n))), {v: ONE}), n)
            right = _dense(t.product.multiply({u: ONE}, _sparse(action.matvec(_unit(v, n)))), n)
            if not left == middle == right:
                raise InputError(f"Product is not B-bilinear at ({u}, {v})")
        if not t.reduction.matmul(action).is_zero():
            raise InputError(f"Reduction is not B-linear: {base.basis_names[b]} does not act as zero on A")
    for u, v in itertools.product(range(n), repeat=2):
        reduced_product = t.reduction.matvec(_dense(t.product.table[u][v], n))
        ru = _sparse(t.reduction.matvec(_unit(u, n)))
        rv = _sparse(t.reduction.matvec(_unit(v, n)))
        if reduced_product != _dense(alg.multiply(ru, rv), alg.dim):
            raise InputError(f"Reduction is not multiplicative at ({u}, {v})")
    if rank(t.reduction) != alg.dim:
        raise InputError("Reduction is not surjective")


def _add_scaled(matrix, other, factor):
    entries = dict(matrix.entries)
    for key, value in other.entries.items():
        entries[key] = entries.get(key, ZERO) + value * factor
    return SparseMatrix(matrix.rows, matrix.cols, entries)


@dataclass(frozen=True)
class FlatnessReport:
    flat: bool
    lifts: list = None
    reason: str = ""


def flatness_check(t, alg, base):
    """ Lifts a basis of A through the reduction; flat iff the lifts form a B-basis of the carrier. """
    validate_flat(t, alg, base)
    lifts = []
    for i in range(alg.dim):
        lifts.append(solve_linear(t.reduction, _unit(i, alg.dim)).particular)
    span = [t.b_action[b].matvec(u) for u in lifts for b in range(base.dim)]
    if rank(span) != t.carrier_dim:
        return FlatnessReport(False, reason="lifted basis does not span the carrier over B")
    if t.carrier_dim != alg.dim * base.dim:
        return FlatnessReport(
            False, reason=f"carrier dimension {t.carrier_dim} != {alg.dim} * {base.dim}: not free over B"
        )
    return FlatnessReport(True, lifts)


# --- F AND ITS INVERSE ---

def functor_F(beta, alg, base):
    """ (A_B, alpha + beta) with the canonical B-action and reduction mod m. """
    if not mc_check(beta, alg, base).is_mc:
        raise ContractError("functor_F needs a Maurer-Cartan element")
    n = alg.dim * base.dim
    product = extend_scalars(alg, base, deformed_product(beta, alg, base).values)
    b_action = []
    for c in range(base.dim):
        entries = {}
        for i in range(alg.dim):
            for b in range(base.dim):
                for b2, s in base.table[b][c].items():
                    entries[(i * base.dim + b2, i * base.dim + b)] = s
        b_action.append(SparseMatrix(n, n, entries))
    reduction = SparseMatrix(alg.dim, n, {(i, i * base.dim): ONE for i in range(alg.dim)})
    return FlatDeformation(n, b_action, product, reduction)


def _transport(t, alg, base):
    """ beta and the B-module isomorphism T: A_B -> carrier, e_i (x) b -> b . u_i. """
    report = flatness_check(t, alg, base)
    if not report.flat:
        raise FlatnessError(f"Not a flat deformation: {report.reason}")
    columns = []
    for i in range(alg.dim):
        for b in range(base.dim):
            columns.append(_sparse(t.b_action[b].matvec(report.lifts[i])))
    transport = SparseMatrix.from_columns(t.carrier_dim, columns)
    back = inverse(transport)

    values = {}
    for i, j in itertools.product(range(alg.dim), repeat=2):
        product = t.product.multiply(_sparse(report.lifts[i]), _sparse(report.lifts[j]))
        coordinates = back.matvec(_dense(product, t.carrier_dim))
        value = {}
        for index, x in enumerate(coordinates):
            if x:
                value[divmod(index, base.dim)] = x
        for l, c in alg.table[i][j].items():
            value[(l, 0)] = value.get((l, 0), ZERO) - c
        values[(i, j)] = value
    return Cochain(2, alg.dim, base, values, m_only=True), transport


def flat_to_mc(t, alg, base):
    beta, _ = _transport(t, alg, base)
    return beta


def transport_flat(t, s):
    """ The same deformation on the carrier rebased along a B-linear automorphism S. """
    n = t.carrier_dim
    if s.rows != n or s.cols != n:
        raise InputError(f"Transport matrix must be {n}x{n}")
    for action in t.b_action:
        if s.matmul(action) != action.matmul(s):
            raise InputError("Transport matrix is not B-linear")
    s_inv = inverse(s)
    columns = [s_inv.column(k) for k in range(n)]
    constants = []
    for u in range(n):
        row = []
        for v in range(n):
            product = t.product.multiply(columns[u], columns[v])
            row.append(s.matvec(_dense(product, n)))
        constants.append(row)
    product = FiniteAlgebra(n, t.product.basis_names, constants)
    return FlatDeformation(n, t.b_action, product, t.reduction.matmul(s_inv))


def h0_to_flat(h0):
    return FlatDeformation(h0.product.dim, h0.b_action, h0.product, h0.reduction)


# --- EQUIVALENCE ---

@dataclass(frozen=True)
class FlatVerdict:
    verdict: str
    isomorphism: SparseMatrix = None
    generator: object = None
    reason: str = ""


def verify_isomorphism(phi, t1, t2, alg):
    """ phi: carrier1 -> carrier2 is a B-algebra isomorphism compatible with the reductions. """
    n = t1.carrier_dim
    if t2.carrier_dim != n or phi.rows != n or phi.cols != n or rank(phi) != n:
        return False
    for a1, a2 in zip(t1.b_action, t2.b_action):
        if phi.matmul(a1) != a2.matmul(phi):
            return False
    if t2.reduction.matmul(phi) != t1.reduction:
        return False
    images = [_sparse(phi.matvec(_unit(u, n))) for u in range(n)]
    for u, v in itertools.product(range(n), repeat=2):
        left = phi.matvec(_dense(t1.product.table[u][v], n))
        right = _dense(t2.product.multiply(images[u], images[v]), n)
        if left != right:
            return False
    return True


def flat_equivalent(t1, t2, alg, base, search=False, settings=DEFAULT_SETTINGS):
    beta1, transport1 = _transport(t1, alg, base)
    beta2, transport2 = _transport(t2, alg, base)
    verdict = gauge_equivalent(beta1, beta2, alg, base, search, settings)
    if verdict.verdict != EQUIVALENT:
        return FlatVerdict(verdict.verdict, reason=verdict.reason)
    phi = exp_gauge(verdict.generator).matrix()
    isomorphism = transport2.matmul(phi).matmul(inverse(transport1))
    if not verify_isomorphism(isomorphism, t1, t2, alg):
        LOGGER.error("Composite isomorphism failed verification; reporting inconclusive")
        return FlatVerdict(INCONCLUSIVE, reason="isomorphism failed verification")
    return FlatVerdict(EQUIVALENT, isomorphism, verdict.generator)
