import itertools
import logging
import math
from dataclasses import dataclass, field

from sympy import QQ, symbols
from sympy.polys.rings import ring

from .barcobar import CobarWord
from .config import DEFAULT_SETTINGS
from .errors import ContractError, DeformationError, InputError, TruncationError
from .exact import ONE, LinearSolver, accumulate, row_reduce
from .hochschild import (
    Cochain,
    cochain_from_vector,
    cochain_levels,
    circle,
    compose,
    deformed_product,
    differential_matrix,
    endomorphism_matrix,
    identity_cochain,
    mc_check,
    outputs_by_letter,
    product_cochain,
)
from .relations import Derivation, mc_rel_check, resolution_differential

LOGGER = logging.getLogger(__name__)

ASSOCIATIVE = "associative"
RELATIONAL = "relational"

EQUIVALENT = "equivalent"
INEQUIVALENT = "inequivalent"
INCONCLUSIVE = "inconclusive"


# --- GROUP ELEMENTS ---

@dataclass(frozen=True)
class GaugeGenerator:
    """ f in L^0(m): an m-valued arity-1 cochain, or an m-valued degree-0 derivation of R_B. """
    kind: str
    f: object

    def __post_init__(self):
        if self.kind == ASSOCIATIVE:
            if not isinstance(self.f, Cochain) or self.f.arity != 1:
                raise InputError("An associative gauge generator is an arity-1 cochain")
            if not self.f.is_m_valued():
                raise InputError("A gauge generator must take values in A (x) m")
        elif self.kind == RELATIONAL:
            if not isinstance(self.f, Derivation) or self.f.degree != 0:
                raise InputError("A relational gauge generator is a degree-0 derivation")
            if not self.f.m_valued:
                raise InputError("A gauge generator must take values in R (x) m")
            if not self.f.is_polydegree_preserving():
                raise TruncationError("A relational gauge generator may not raise polydegree")
        else:
            raise InputError(f"Unknown gauge kind {self.kind!r}")

    @classmethod
    def associative(cls, f):
        return cls(ASSOCIATIVE, f.with_m_only())

    @classmethod
    def relational(cls, theta):
        return cls(RELATIONAL, theta)


@dataclass(frozen=True, eq=False)
class RelationalMap:
    """ B-algebra endomorphism of R_B given on generators; unlisted generators are fixed. """
    base: object
    word_bound: int
    images: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for block, chain in self.images.items():
            block = tuple(block)
            chain = {key: c for key, c in chain.items() if c}
            if chain != _generator_chain(block):
                cleaned[block] = chain
        object.__setattr__(self, "images", cleaned)

    def image(self, block):
        return self.images.get(tuple(block)) or _generator_chain(block)

    def apply(self, chain):
        out = {}
        for (word, b0), c0 in chain.items():
            value = {(None, b0): c0}
            for block in word.blocks:
                value = _append_image(value, self.image(block), self.base)
            for (new, b), c in value.items():
                accumulate(out, (new, b), c)
        return out

    def __eq__(self, other):
        if not isinstance(other, RelationalMap):
            return NotImplemented
        return self.base == other.base and self.images == other.images

    __hash__ = None


def _generator_chain(block):
    return {(CobarWord.generator(block), 0): ONE}


def _append_image(partial, image, base):
    """ partial * image, where a None word in partial stands for the empty product. """
    out = {}
    for (w1, b1), c1 in partial.items():
        for (w2, b2), c2 in image.items():
            word = w2 if w1 is None else w1 * w2
            for b, s in base.table[b1][b2].items():
                accumulate(out, (word, b), c1 * c2 * s)
    return out


@dataclass(frozen=True)
class GaugeElement:
    """ phi = 1 + psi with psi m-valued: an arity-1 cochain (associative) or a RelationalMap. """
    kind: str
    phi: object

    def __post_init__(self):
        if self.kind == ASSOCIATIVE:
            if not isinstance(self.phi, Cochain) or self.phi.arity != 1:
                raise InputError("An associative gauge element is an arity-1 cochain")
            psi = self.phi - identity_cochain(self.phi.dim, self.phi.base)
            if not psi.is_m_valued():
                raise InputError("Gauge element is not of the form 1 + psi with psi in A (x) m")
        elif self.kind == RELATIONAL:
            if not isinstance(self.phi, RelationalMap):
                raise InputError("A relational gauge element is a RelationalMap")
            for block, chain in self.phi.images.items():
                for (word, b), c in chain.items():
                    if b == 0 and word != CobarWord.generator(block):
                        raise InputError(f"Image of {block} is not of the form 1 + psi with psi in R (x) m")
                if chain.get((CobarWord.generator(block), 0)) != ONE:
                    raise InputError(f"Image of {block} is not of the form 1 + psi with psi in R (x) m")
        else:
            raise InputError(f"Unknown gauge kind {self.kind!r}")

    def matrix(self):
        """ k-matrix of phi on A_B, coordinates l * dim B + b. """
        if self.kind != ASSOCIATIVE:
            raise ContractError("Only associative gauge elements have a matrix")
        return endomorphism_matrix(self.phi)


def identity_gauge(alg, base, kind=ASSOCIATIVE, word_bound=3):
    if kind == ASSOCIATIVE:
        return GaugeElement(ASSOCIATIVE, identity_cochain(alg.dim, base))
    return GaugeElement(RELATIONAL, RelationalMap(base, word_bound))


# --- EXP AND LOG ---

def _series(f, coefficients, one=ONE):
    """ sum_k coefficients[k] f^k for an arity-1 cochain f, f^0 = 1. """
    power = identity_cochain(f.dim, f.base, one)
    total = power.scaled(coefficients[0])
    for coefficient in coefficients[1:]:
        power = compose(f, power)
        if coefficient:
            total = total + power.scaled(coefficient)
    return total


def _chain_series(linear_map, chain, coefficients):
    total = {key: c * coefficients[0] for key, c in chain.items() if coefficients[0]}
    power = chain
    for coefficient in coefficients[1:]:
        power = linear_map(power)
        for key, c in power.items():
            accumulate(total, key, c * coefficient)
    return total


def _exp_coefficients(nilpotency):
    return [QQ(1, math.factorial(k)) for k in range(max(nilpotency, 1))]


def _log_coefficients(nilpotency):
    return [QQ(0)] + [QQ((-1) ** (n - 1), n) for n in range(1, max(nilpotency, 1))]


def _inverse_coefficients(nilpotency):
    return [QQ((-1) ** k) for k in range(max(nilpotency, 1))]


def exp_series(f, one=ONE):
    """ sum_{k<N} f^k / k!, N the nilpotency index of the base. """
    return _series(f, _exp_coefficients(f.base.nilpotency), one)


def exp_gauge(generator):
    if generator.kind == ASSOCIATIVE:
        return GaugeElement(ASSOCIATIVE, exp_series(generator.f))
    theta = generator.f
    coefficients = _exp_coefficients(theta.base.nilpotency)
    images = {
        block: _chain_series(theta.apply, _generator_chain(block), coefficients)
        for block in theta.generator_values
    }
    return GaugeElement(RELATIONAL, RelationalMap(theta.base, theta.word_bound, images))


def _psi_relational(phi):
    def psi(chain):
        out = phi.apply(chain)
        for key, c in chain.items():
            accumulate(out, key, -c)
        return out

    return psi


def log_gauge(element):
    if element.kind == ASSOCIATIVE:
        phi = element.phi
        psi = phi - identity_cochain(phi.dim, phi.base)
        if not psi.is_m_valued():
            raise InputError("Gauge element is not of the form 1 + psi with psi in A (x) m")
        return GaugeGenerator.associative(_series(psi, _log_coefficients(phi.base.nilpotency)))
    phi = element.phi
    psi = _psi_relational(phi)
    coefficients = _log_coefficients(phi.base.nilpotency)
    values = {block: _chain_series(psi, _generator_chain(block), coefficients) for block in phi.images}
    return GaugeGenerator.relational(Derivation(0, phi.base, phi.word_bound, values, m_valued=True))


def inverse_gauge(element):
    if element.kind == ASSOCIATIVE:
        phi = element.phi
        psi = phi - identity_cochain(phi.dim, phi.base)
        return GaugeElement(ASSOCIATIVE, _series(psi, _inverse_coefficients(phi.base.nilpotency)))
    phi = element.phi
    psi = _psi_relational(phi)
    coefficients = _inverse_coefficients(phi.base.nilpotency)
    images = {block: _chain_series(psi, _generator_chain(block), coefficients) for block in phi.images}
    return GaugeElement(RELATIONAL, RelationalMap(phi.base, phi.word_bound, images))


def compose_gauge(first, second):
    """ first o second. """
    if first.kind != second.kind:
        raise InputError("Cannot compose gauge elements of different kinds")
    if first.kind == ASSOCIATIVE:
        return GaugeElement(ASSOCIATIVE, compose(first.phi, second.phi))
    blocks = set(first.phi.images) | set(second.phi.images)
    images = {block: first.phi.apply(second.phi.image(block)) for block in blocks}
    bound = max(first.phi.word_bound, second.phi.word_bound)
    return GaugeElement(RELATIONAL, RelationalMap(first.phi.base, bound, images))


# --- ACTIONS ---

def substitute(gamma, g):
    """ gamma(g(a_1), ..., g(a_n)) for an arity-1 cochain g, extended B-multilinearly. """
    base = gamma.base
    by_letter = outputs_by_letter(g)
    out = {}
    for s, value in gamma.values.items():
        for combo in itertools.product(*(by_letter.get(letter, ()) for letter in s)):
            key = tuple(t[0] for t, _, _ in combo)
            _, b_first, c_first = combo[0]
            weight = {b_first: c_first}
            for _, b, c in combo[1:]:
                weight = base.multiply(weight, {b: c})
            target = out.setdefault(key, {})
            for (l, b1), c1 in value.items():
                for b2, w in weight.items():
                    for b3, st in base.table[b1][b2].items():
                        accumulate(target, (l, b3), c1 * w * st)
    return Cochain(gamma.arity, gamma.dim, base, out)


def conjugate_product(phi, phi_inverse, gamma):
    """ phi o gamma o (phi^-1 (x) phi^-1). """
    return circle(phi, substitute(gamma, phi_inverse))


def gauge_act(element, target, alg, base, word_bound=None):
    """ beta -> phi.(alpha + beta) - alpha, or delta -> phi (s + delta) phi^-1 - s. """
    if element.kind == ASSOCIATIVE:
        if not mc_check(target, alg, base).is_mc:
            raise ContractError("The gauge action is only defined on Maurer-Cartan elements")
        conjugated = conjugate_product(
            element.phi, inverse_gauge(element).phi, deformed_product(target, alg, base)
        )
        return (conjugated - product_cochain(alg, base)).with_m_only()

    word_bound = word_bound or target.word_bound
    if not mc_rel_check(target, alg, base, word_bound).is_mc:
        raise ContractError("The gauge action is only defined on deformations of the relations")
    s = resolution_differential(alg, base, word_bound)
    total = s + target
    phi = element.phi
    phi_inverse = inverse_gauge(element).phi
    values = {}
    for block in s.generator_values.keys() | target.generator_values.keys() | phi.images.keys():
        value = phi.apply(total.apply(phi_inverse.image(block)))
        for key, c in s.on_generator(block).items():
            accumulate(value, key, -c)
        values[block] = value
    return Derivation(1, base, word_bound, values, m_valued=True)


# --- EQUIVALENCE ---

@dataclass(frozen=True)
class GaugeVerdict:
    verdict: str
    generator: GaugeGenerator = None
    order: int = None
    reason: str = ""


class GaugeSolver:
    """
    Order-by-order search for f with exp(f).(alpha + beta1) = alpha + beta2.

    At order r the unknown f_r solves d f_r = R_r, R the current residual read
    at level r of the filtration basis; kernel directions stay symbolic as ring
    parameters, and the solvability conditions of later orders constrain them.
    """

    def __init__(self, alg, base, settings=DEFAULT_SETTINGS, search=False):
        self.alg = alg
        self.base = base
        self.settings = settings
        self.search = search
        self.filtration = base.filtration()
        self.solver = LinearSolver(differential_matrix(alg, 1, settings.max_arity))
        capacity = max(1, alg.dim * alg.dim * (base.dim - 1))
        self.ring, *self.params = ring(symbols(f"t0:{capacity}"), QQ)
        self.live = []
        self.full_space = True
        self._used = 0

    # --- SOLVE ---

    def solve(self, beta1, beta2):
        dim, base = self.alg.dim, self.base
        gamma1 = self._lift(deformed_product(beta1, self.alg, base))
        gamma2 = self._lift(deformed_product(beta2, self.alg, base))
        f = Cochain.zero(1, dim, base, m_only=True)

        for r in range(1, base.nilpotency):
            residual = self._residual(f, gamma1, gamma2)
            rhs = self._order_rhs(residual, r)
            conditions = [c for vector in rhs.values() for c in self.solver.conditions(vector, self.ring.zero) if c]
            LOGGER.debug(f"Order {r}: {len(conditions)} nonzero conditions on {len(self.live)} live parameters")

            status, substitution = self._resolve(conditions)
            if status == INEQUIVALENT:
                if r == 1 or self.full_space:
                    return GaugeVerdict(INEQUIVALENT, order=r, reason=f"coboundary equation unsolvable at order {r}")
                return GaugeVerdict(INCONCLUSIVE, order=r, reason=f"no solution in the retained parameters at order {r}")
            if status == INCONCLUSIVE:
                return GaugeVerdict(INCONCLUSIVE, order=r, reason=f"nonlinear parameter conditions at order {r}")
            if substitution:
                f = self._substitute(f, substitution)
                residual = self._substitute(residual, substitution)
                rhs = self._order_rhs(residual, r)
            f = f + self._order_solution(rhs, r)

        if self.live:
            f = self._substitute(f, [(self.params[p], self.ring.zero) for p in self.live])
        f = f.map_coefficients(self._to_rational)
        return self._certify(GaugeGenerator.associative(f), beta1, beta2)

    def _certify(self, generator, beta1, beta2):
        replay = gauge_act(exp_gauge(generator), beta1, self.alg, self.base)
        if replay != beta2:
            LOGGER.error("Gauge witness failed to replay; reporting inconclusive")
            return GaugeVerdict(INCONCLUSIVE, reason="witness failed to replay")
        LOGGER.info("Gauge equivalence certified by replay")
        return GaugeVerdict(EQUIVALENT, generator)

    # --- ORDER STEPS ---

    def _lift(self, cochain):
        return cochain.map_coefficients(self.ring.ground_new)

    def _to_rational(self, value):
        constant = value.get(self.ring.zero_monom, QQ(0))
        if len(value) > (1 if constant else 0):
            raise DeformationError("Unresolved gauge parameter in the final generator")
        return QQ.convert(constant)

    def _residual(self, f, gamma1, gamma2):
        one = self.ring.one
        phi = exp_series(f, one)
        phi_inverse = exp_series(-f, one)
        return conjugate_product(phi, phi_inverse, gamma1) - gamma2

    def _order_rhs(self, residual, r):
        levels = cochain_levels(residual, self.filtration, self.ring.zero)
        for k, vector in levels.items():
            if self.filtration.levels[k] < r and any(vector):
                raise DeformationError(f"Residual does not vanish below order {r}")
        return {k: levels.get(k, [self.ring.zero] * self.solver.rows) for k in self.filtration.indices_at(r)}

    def _order_solution(self, rhs, r):
        update = Cochain.zero(1, self.alg.dim, self.base, m_only=True)
        for k, vector in rhs.items():
            solution = self.solver.particular(vector, self.ring.zero)
            for kernel_vector in self.solver.kernel:
                t = self._new_param()
                solution = [x + t * v if v else x for x, v in zip(solution, kernel_vector)]
            update = update + cochain_from_vector(
                solution, 1, self.alg.dim, self.base, self.filtration.vectors[k], m_only=True
            )
        LOGGER.debug(f"Order {r}: {len(self.live)} live parameters after the solve")
        return update

    def _new_param(self):
        if self._used >= len(self.params):
            raise DeformationError("Gauge parameter capacity exhausted")
        index = self._used
        self._used += 1
        self.live.append(index)
        return self.params[index]

    def _substitute(self, cochain, substitution):
        return cochain.map_coefficients(lambda p: p.compose(list(substitution)))

    # --- PARAMETER CONDITIONS ---

    def _resolve(self, conditions):
        """ Returns (status, substitution) with status None when the conditions are met. """
        if not conditions:
            return None, []
        degree = max(max(sum(monom) for monom in c.keys()) for c in conditions)
        if degree <= 1:
            return self._resolve_affine(conditions)
        self.full_space = False
        zeros = [(self.params[p], self.ring.zero) for p in self.live]
        if self._satisfied(conditions, zeros):
            self.live = []
            return None, zeros
        if (
            self.search
            and len(self.live) <= self.settings.search_max_parameters
            and self.base.nilpotency <= self.settings.search_max_nilpotency
        ):
            radius = self.settings.search_radius
            for values in itertools.product(range(-radius, radius + 1), repeat=len(self.live)):
                assignment = [(self.params[p], self.ring.ground_new(v)) for p, v in zip(self.live, values)]
                if self._satisfied(conditions, assignment):
                    LOGGER.info(f"Parameter search found {values}")
                    self.live = []
                    return None, assignment
        return INCONCLUSIVE, None

    def _satisfied(self, conditions, assignment):
        return all(not c.compose(assignment) for c in conditions)

    def _resolve_affine(self, conditions):
        column = {p: j for j, p in enumerate(self.live)}
        last = len(self.live)
        dod = {}
        for i, c in enumerate(conditions):
            row = {}
            for monom, coefficient in c.items():
                if sum(monom) == 0:
                    row[last] = -coefficient
                else:
                    row[column[monom.index(1)]] = coefficient
            dod[i] = row
        reduced, pivots = row_reduce(dod)
        if pivots and pivots[-1] == last:
            return INEQUIVALENT, None
        substitution = []
        for k, pivot in enumerate(pivots):
            row = reduced[k]
            expression = self.ring.ground_new(row.get(last, QQ(0)))
            for j, a in row.items():
                if j != pivot and j != last:
                    expression = expression - self.params[self.live[j]] * a
            substitution.append((self.params[self.live[pivot]], expression))
        pivot_params = {self.live[p] for p in pivots}
        self.live = [p for p in self.live if p not in pivot_params]
        return None, substitution


def gauge_equivalent(beta1, beta2, alg, base, search=False, settings=DEFAULT_SETTINGS):
    for beta in (beta1, beta2):
        if not mc_check(beta, alg, base).is_mc:
            raise ContractError("gauge_equivalent needs Maurer-Cartan elements")
    if beta1 == beta2:
        return GaugeVerdict(EQUIVALENT, GaugeGenerator.associative(Cochain.zero(1, alg.dim, base)))
    verdict = GaugeSolver(alg, base, settings, search).solve(beta1, beta2)
    LOGGER.info(f"gauge_equivalent: {verdict.verdict} {verdict.reason}".rstrip())
    return verdict
