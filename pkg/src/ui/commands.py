import logging
from dataclasses import dataclass, field

from ..core.algebra import check_associative, extend_scalars, require_artin, require_associative, validate_artin
from ..core.barcobar import build_complex, dump_complex, homotopy_defects
from ..core.config import DEFAULT_SETTINGS
from ..core.errors import DeformationError, InputError
from ..core.exact import format_rational
from ..core.flat import (
    flat_equivalent,
    flat_to_mc,
    flatness_check,
    functor_F,
    h0_to_flat,
    verify_isomorphism,
)
from ..core.gauge import EQUIVALENT, INEQUIVALENT, GaugeGenerator, exp_gauge, gauge_act, gauge_equivalent
from ..core.hochschild import deformed_product, hh_dimension, mc_check
from ..core.relations import delta_of_beta, h0_compute, mc_rel_check, projected_cochain
from ..core.sampling import random_cochain, random_generator, random_mc_element, seeded
from ..core.serialization import (
    algebra_from_json,
    algebra_to_json,
    base_from_json,
    cochain_from_json,
    cochain_to_json,
    derivation_from_json,
    derivation_to_json,
    dumps,
    flat_from_json,
    load_json,
    matrix_to_json,
)

LOGGER = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
ERROR = "error"

EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2, ERROR: 3}

COMMANDS = (
    "triangle",
    "check-assoc",
    "validate-base",
    "mc-check",
    "hh",
    "gauge-act",
    "gauge-equiv",
    "d2-check",
    "homotopy-check",
    "delta",
    "mc-rel-check",
    "h0",
    "flat-check",
    "flat-to-mc",
    "flat-equiv",
)


@dataclass
class Report:
    command: str
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return EXIT_CODES[self.verdict]

    def to_json(self):
        return dumps({"command": self.command, "verdict": self.verdict, "details": self.details})


def _verdict(flag):
    return PASS if flag else FAIL


def _cells(cells, alg, base):
    return [{"word": word.label(alg.basis_names), "b": base.basis_names[b]} for word, b in cells]


class CommandRunner:
    """ Runs one command on file inputs and turns the outcome into a Report. """

    def __init__(self, mode, settings=DEFAULT_SETTINGS, **kwargs):
        self.mode = mode
        self.settings = settings
        self.kwargs = kwargs
        self.stage = "input"
        self._alg = None
        self._base = None

    def run(self):
        try:
            LOGGER.info(f"--- Starting Task: {self.mode} ---")
            handler = getattr(self, "cmd_" + self.mode.replace("-", "_"), None)
            if self.mode not in COMMANDS or handler is None:
                raise InputError(f"Unknown command {self.mode!r}")
            report = handler()
            LOGGER.info(f"--- Task Finished: {report.verdict} ---")
            return report

        except InputError as e:
            LOGGER.error(f"Input error: {e}")
            return Report(self.mode, ERROR, {"error": str(e)})
        except DeformationError as e:
            LOGGER.error(f"ERROR in stage {self.stage}: {e}")
            return Report(self.mode, FAIL, {"stage": self.stage, "error": str(e)})

    # --- INPUTS ---

    def _option(self, name, default=None):
        value = self.kwargs.get(name)
        return default if value is None else value

    def _path(self, name):
        path = self._option(name)
        if not path:
            raise InputError(f"--{name.replace('_', '-')} is required for {self.mode}")
        return path

    def _paths(self, name, count):
        paths = self._option(name, [])
        if len(paths) != count:
            raise InputError(f"{self.mode} needs exactly {count} --{name} file(s), got {len(paths)}")
        return paths

    def algebra(self, associative=True):
        if self._alg is None:
            self._alg = algebra_from_json(load_json(self._path("algebra")))
            if associative:
                require_associative(self._alg)
        return self._alg

    def base(self):
        if self._base is None:
            self._base = base_from_json(load_json(self._path("base")))
            require_artin(self._base)
        return self._base

    def cochain(self, path, arity=2):
        c = cochain_from_json(load_json(path), self.algebra(), self.base())
        if c.arity != arity:
            raise InputError(f"Expected an arity-{arity} cochain in {path}, got arity {c.arity}")
        return c.with_m_only() if c.is_m_valued() else c

    def beta(self):
        return self.cochain(self._paths("cochain", 1)[0])

    def derivation(self, word_bound):
        return derivation_from_json(load_json(self._path("derivation")), self.algebra(), self.base(), word_bound)

    def flat(self, path):
        return flat_from_json(load_json(path), self.algebra(), self.base())

    def word_bound(self):
        return self.settings.word_bound(self.mode, self._option("word_bound"))

    def rng(self):
        return seeded(self._option("seed", self.settings.seed))

    # --- ALGEBRAS ---

    def cmd_check_assoc(self):
        alg = self.algebra(associative=False)
        report = check_associative(alg)
        details = {"dim": alg.dim}
        if not report.associative:
            details["witness"] = [alg.basis_names[i] for i in report.witness]
            details["associator"] = {alg.basis_names[l]: format_rational(c) for l, c in report.associator.items()}
        return Report(self.mode, _verdict(report.associative), details)

    def cmd_validate_base(self):
        base = base_from_json(load_json(self._path("base")))
        report = validate_artin(base)
        details = {"dim": base.dim}
        if report.valid:
            filtration = base.filtration()
            details["nilpotency"] = report.nilpotency
            details["filtration_levels"] = list(filtration.levels)
        else:
            details["reason"] = report.reason
        return Report(self.mode, _verdict(report.valid), details)

    def cmd_hh(self):
        alg = self.algebra()
        n = self._option("degree")
        if n is None:
            raise InputError("--degree is required for hh")
        self.stage = "hh_dimension"
        return Report(self.mode, PASS, {"degree": n, "dimension": hh_dimension(alg, n, self.settings.max_arity)})

    # --- MAURER-CARTAN AND GAUGE ---

    def cmd_mc_check(self):
        alg, base = self.algebra(), self.base()
        self.stage = "mc_check"
        if self._option("cochain"):
            report = mc_check(self.beta(), alg, base, self.settings.max_arity)
            return Report(self.mode, _verdict(report.is_mc), {"residual": cochain_to_json(report.residual)})

        # No cochain given: randomized comparison against associativity.
        rng = self.rng()
        samples = self._option("samples", self.settings.samples)
        solutions = 0
        disagreements = []
        for k in range(samples):
            if k % 2:
                beta = random_mc_element(rng, alg, base)
            else:
                beta = random_cochain(rng, 2, alg, base)
            is_mc = mc_check(beta, alg, base, self.settings.max_arity).is_mc
            deformed = extend_scalars(alg, base, deformed_product(beta, alg, base).values)
            if is_mc != check_associative(deformed).associative:
                disagreements.append(cochain_to_json(beta))
            solutions += is_mc
        LOGGER.info(f"mc_check on {samples} samples: {solutions} solutions, {len(disagreements)} disagreements")
        details = {"samples": samples, "maurer_cartan": solutions, "disagreements": disagreements}
        return Report(self.mode, _verdict(not disagreements), details)

    def cmd_gauge_act(self):
        alg, base = self.algebra(), self.base()
        beta = self.beta()
        if self._option("generator"):
            generator = GaugeGenerator.associative(self.cochain(self._path("generator"), arity=1))
        else:
            generator = random_generator(self.rng(), alg, base)
        self.stage = "gauge_act"
        image = gauge_act(exp_gauge(generator), beta, alg, base)
        self.stage = "mc_check"
        preserved = mc_check(image, alg, base).is_mc
        details = {"generator": cochain_to_json(generator.f), "result": cochain_to_json(image)}
        return Report(self.mode, _verdict(preserved), details)

    def cmd_gauge_equiv(self):
        alg, base = self.algebra(), self.base()
        beta1, beta2 = (self.cochain(path) for path in self._paths("cochain", 2))
        self.stage = "gauge_equivalent"
        verdict = gauge_equivalent(beta1, beta2, alg, base, self._option("search", False), self.settings)
        details = {"verdict": verdict.verdict, "reason": verdict.reason, "order": verdict.order}
        if verdict.verdict == INEQUIVALENT:
            return Report(self.mode, FAIL, details)
        if verdict.verdict != EQUIVALENT:
            return Report(self.mode, INCONCLUSIVE, details)
        self.stage = "replay"
        if gauge_act(exp_gauge(verdict.generator), beta1, alg, base) != beta2:
            return Report(self.mode, INCONCLUSIVE, {**details, "reason": "witness failed to replay"})
        details["witness"] = cochain_to_json(verdict.generator.f)
        return Report(self.mode, PASS, details)

    # --- COBAR COMPLEXES ---

    def _optional_beta(self):
        if not self._option("cochain"):
            return None
        beta = self.beta()
        if not mc_check(beta, self.algebra(), self.base()).is_mc:
            raise InputError("The cochain is not a Maurer-Cartan element")
        return beta

    def cmd_d2_check(self):
        alg = self.algebra()
        beta = self._optional_beta()
        base = self.base() if beta is not None else None
        w = self.word_bound()
        self.stage = "assemble_complex"
        complex_ = build_complex(alg, w, base, beta)
        gradings = all(word.degree == i for i, words in complex_.graded_basis.items() for word in words)
        defects = complex_.square_defects()
        details = {
            "word_bound": w,
            "dimensions": {str(i): len(complex_.cells(i)) for i in complex_.degrees},
            "gradings_consistent": gradings,
            "defects": {str(i): m.nnz for i, m in defects.items()},
        }
        if self._option("verbose"):
            details["complex"] = dump_complex(complex_, alg, base)
        return Report(self.mode, _verdict(gradings and not defects), details)

    def cmd_homotopy_check(self):
        alg = self.algebra()
        w = self.word_bound()
        self.stage = "homotopy"
        failures = {}
        for n in range(2, w + 1):
            words = homotopy_defects(alg.dim, n)
            if words:
                failures[str(n)] = [word.label(alg.basis_names) for word in words]
        return Report(self.mode, _verdict(not failures), {"word_bound": w, "failures": failures})

    # --- RELATIONS ---

    def cmd_delta(self):
        alg, base = self.algebra(), self.base()
        beta = self.beta()
        w = self.word_bound()
        self.stage = "delta_of_beta"
        delta = delta_of_beta(beta, alg, base, w)
        self.stage = "project_derivation"
        recovered = projected_cochain(delta, alg) == beta
        return Report(self.mode, _verdict(recovered), {"derivation": derivation_to_json(delta, alg)})

    def _delta(self, w):
        if self._option("derivation"):
            return self.derivation(w)
        self.stage = "delta_of_beta"
        return delta_of_beta(self.beta(), self.algebra(), self.base(), w)

    def cmd_mc_rel_check(self):
        alg, base = self.algebra(), self.base()
        w = self.word_bound()
        delta = self._delta(w)
        self.stage = "mc_rel_check"
        report = mc_rel_check(delta, alg, base, w)
        residual = {str(i): m.nnz for i, m in report.residual.items()}
        return Report(self.mode, _verdict(report.is_mc), {"word_bound": w, "residual": residual})

    def cmd_h0(self):
        alg, base = self.algebra(), self.base()
        w = self.word_bound()
        delta = self._delta(w)
        self.stage = "h0_compute"
        h0 = h0_compute(delta, alg, base, w)
        self.stage = "flatness_check"
        flat = flatness_check(h0_to_flat(h0), alg, base).flat
        details = {
            "word_bound": w,
            "dimension": h0.dimension,
            "section": _cells(h0.section, alg, base),
            "product": algebra_to_json(h0.product),
            "b_action": [matrix_to_json(m) for m in h0.b_action],
            "flat": flat,
        }
        return Report(self.mode, _verdict(flat and h0.dimension == alg.dim * base.dim), details)

    # --- FLAT DEFORMATIONS ---

    def cmd_flat_check(self):
        alg, base = self.algebra(), self.base()
        t = self.flat(self._paths("flat", 1)[0])
        self.stage = "flatness_check"
        report = flatness_check(t, alg, base)
        return Report(self.mode, _verdict(report.flat), {"carrier_dim": t.carrier_dim, "reason": report.reason})

    def cmd_flat_to_mc(self):
        alg, base = self.algebra(), self.base()
        t = self.flat(self._paths("flat", 1)[0])
        self.stage = "flat_to_mc"
        beta = flat_to_mc(t, alg, base)
        self.stage = "flat_equivalent"
        verdict = flat_equivalent(functor_F(beta, alg, base), t, alg, base)
        details = {"cochain": cochain_to_json(beta), "verdict": verdict.verdict}
        if verdict.isomorphism is not None:
            details["isomorphism"] = matrix_to_json(verdict.isomorphism)
        return Report(self.mode, _verdict(verdict.verdict == EQUIVALENT), details)

    def cmd_flat_equiv(self):
        alg, base = self.algebra(), self.base()
        t1, t2 = (self.flat(path) for path in self._paths("flat", 2))
        self.stage = "flat_equivalent"
        verdict = flat_equivalent(t1, t2, alg, base, self._option("search", False), self.settings)
        details = {"verdict": verdict.verdict, "reason": verdict.reason}
        if verdict.verdict == INEQUIVALENT:
            return Report(self.mode, FAIL, details)
        if verdict.verdict != EQUIVALENT:
            return Report(self.mode, INCONCLUSIVE, details)
        self.stage = "verify_isomorphism"
        if not verify_isomorphism(verdict.isomorphism, t1, t2, alg):
            return Report(self.mode, INCONCLUSIVE, {**details, "reason": "isomorphism failed verification"})
        details["isomorphism"] = matrix_to_json(verdict.isomorphism)
        details["witness"] = cochain_to_json(verdict.generator.f)
        return Report(self.mode, PASS, details)

    # --- THE TRIANGLE ---

    def cmd_triangle(self):
        """ mc_check -> delta -> mc_rel_check -> H^0 -> comparison with functor_F. """
        alg, base = self.algebra(), self.base()
        beta = self.beta()
        w = self.word_bound()
        details = {"word_bound": w}

        self.stage = "mc_check"
        if not mc_check(beta, alg, base).is_mc:
            return Report(self.mode, FAIL, {**details, "stage": self.stage})

        self.stage = "delta_of_beta"
        delta = delta_of_beta(beta, alg, base, w)

        self.stage = "mc_rel_check"
        if not mc_rel_check(delta, alg, base, w).is_mc:
            return Report(self.mode, FAIL, {**details, "stage": self.stage})

        self.stage = "h0_compute"
        h0 = h0_compute(delta, alg, base, w)
        details["h0_dimension"] = h0.dimension
        details["section"] = _cells(h0.section, alg, base)
        details["product"] = algebra_to_json(h0.product)
        if h0.dimension != alg.dim * base.dim:
            return Report(self.mode, FAIL, {**details, "stage": self.stage})

        self.stage = "flat_equivalent"
        expected = functor_F(beta, alg, base)
        computed = h0_to_flat(h0)
        verdict = flat_equivalent(computed, expected, alg, base, self._option("search", False), self.settings)
        details["verdict"] = verdict.verdict
        if verdict.verdict != EQUIVALENT:
            code = FAIL if verdict.verdict == INEQUIVALENT else INCONCLUSIVE
            return Report(self.mode, code, {**details, "stage": self.stage, "reason": verdict.reason})
        if not verify_isomorphism(verdict.isomorphism, computed, expected, alg):
            return Report(self.mode, INCONCLUSIVE, {**details, "stage": "verify_isomorphism"})
        details["isomorphism"] = matrix_to_json(verdict.isomorphism)
        LOGGER.info(f"Triangle closes at W={w}: H^0 of dimension {h0.dimension}")
        return Report(self.mode, PASS, details)


def run_command(mode, settings=DEFAULT_SETTINGS, **kwargs):
    return CommandRunner(mode, settings, **kwargs).run()
