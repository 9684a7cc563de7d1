import json
from pathlib import Path

import pytest

from conftest import minus_2y_eps, x_eps
from src.core.barcobar import CobarWord
from src.core.errors import InputError
from src.core.exact import ONE
from src.core.flat import functor_F
from src.core.gauge import INCONCLUSIVE, GaugeVerdict
from src.core.hochschild import Cochain
from src.core.relations import Derivation
from src.core.sampling import B2, B3, E2, random_algebra, random_mc_element, seeded
from src.core.serialization import (
    algebra_from_json,
    algebra_to_json,
    base_to_json,
    cochain_from_json,
    cochain_to_json,
    derivation_to_json,
    dumps,
    flat_to_json,
    load_json,
)
from src.main import main
from src.ui.commands import ERROR, FAIL, PASS, run_command

DATA = Path(__file__).resolve().parent.parent / "data"


def _data(name):
    return str(DATA / name)


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(dumps(payload), encoding="utf-8")
    return str(path)


# --- SERIALIZATION ---

def test_data_files_match_named_examples():
    assert algebra_from_json(load_json(_data("E2.json"))) == E2()


def test_unital_algebras_are_rejected():
    with pytest.raises(InputError):
        algebra_from_json({"dim": 1, "mul": [[["1"]]], "unital": True})


def test_malformed_inputs(tmp_path, e2, b2):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError):
        load_json(str(broken))
    with pytest.raises(InputError):
        cochain_from_json({"arity": 2, "values": [{"in": ["x", "z"], "out": [["0", "1"], ["0", "0"]]}]}, e2, b2)
    with pytest.raises(InputError):
        cochain_from_json({"arity": 2, "values": [{"in": ["x", "x"], "out": [["0", "1"]]}]}, e2, b2)


# --- COMMANDS ON THE WORKED EXAMPLES ---

def test_check_assoc():
    report = run_command("check-assoc", algebra=_data("E2.json"))
    assert report.verdict == PASS
    assert report.exit_code == 0


def test_hh_of_e1():
    report = run_command("hh", algebra=_data("E1.json"), degree=2)
    assert report.details["dimension"] == 1


def test_gauge_equiv_worked_pair():
    report = run_command(
        "gauge-equiv",
        algebra=_data("E2.json"),
        base=_data("B2.json"),
        cochain=[_data("E2_zero.json"), _data("E2_minus_2y_eps.json")],
    )
    assert report.verdict == PASS
    assert "witness" in report.details


def test_gauge_equiv_inequivalent_pair(tmp_path, e1, b2):
    zero = _write(tmp_path, "zero.json", cochain_to_json(Cochain.zero(2, 1, b2)))
    report = run_command(
        "gauge-equiv", algebra=_data("E1.json"), base=_data("B2.json"), cochain=[zero, _data("E1_x_eps.json")]
    )
    assert report.verdict == FAIL
    assert report.exit_code == 1
    assert report.details["order"] == 1


def test_undeformed_triangle(tmp_path, e1, b2):
    zero = _write(tmp_path, "zero.json", cochain_to_json(Cochain.zero(2, 1, b2)))
    report = run_command("triangle", algebra=_data("E1.json"), base=_data("B2.json"), cochain=[zero])
    assert report.verdict == PASS
    assert report.details["h0_dimension"] == 2


def test_triangle_on_e1():
    report = run_command("triangle", algebra=_data("E1.json"), base=_data("B2.json"), cochain=[_data("E1_x_eps.json")])
    assert report.verdict == PASS
    assert report.details["h0_dimension"] == 2


def test_triangle_on_e2():
    report = run_command("triangle", algebra=_data("E2.json"), base=_data("B2.json"), cochain=[_data("E2_x_eps.json")])
    assert report.verdict == PASS
    assert report.details["h0_dimension"] == 4
    assert report.details["product"]["mul"][0][0] == ["0", "1", "1", "0"]


def test_triangle_stops_at_mc_check(tmp_path, e2, b2):
    bad = Cochain(2, 2, b2, {(0, 1): {(0, 1): ONE}})
    path = _write(tmp_path, "bad.json", cochain_to_json(bad))
    report = run_command("triangle", algebra=_data("E2.json"), base=_data("B2.json"), cochain=[path])
    assert report.verdict == FAIL
    assert report.details["stage"] == "mc_check"


@pytest.mark.parametrize("seed", range(20))
def test_random_triangles(tmp_path, seed):
    rng = seeded(8000 + seed)
    base = B2() if seed % 2 else B3()
    alg = random_algebra(rng, max_dim=2)
    beta = random_mc_element(rng, alg, base)
    report = run_command(
        "triangle",
        algebra=_write(tmp_path, "algebra.json", algebra_to_json(alg)),
        base=_write(tmp_path, "base.json", base_to_json(base)),
        cochain=[_write(tmp_path, "beta.json", cochain_to_json(beta))],
    )
    assert report.verdict == PASS, report.details
    assert report.details["h0_dimension"] == alg.dim * base.dim


def test_cobar_commands():
    e2 = _data("E2.json")
    assert run_command("d2-check", algebra=e2, word_bound=3).verdict == PASS
    deformed = run_command("d2-check", algebra=e2, base=_data("B2.json"), cochain=[_data("E2_x_eps.json")], word_bound=3)
    assert deformed.verdict == PASS
    assert run_command("homotopy-check", algebra=e2, word_bound=3).verdict == PASS


def test_relation_commands(tmp_path, e1, b2):
    inputs = {"algebra": _data("E2.json"), "base": _data("B2.json"), "cochain": [_data("E2_x_eps.json")]}
    assert run_command("delta", **inputs).verdict == PASS
    assert run_command("mc-rel-check", **inputs).verdict == PASS
    h0 = run_command("h0", **inputs)
    assert h0.verdict == PASS
    assert h0.details["dimension"] == 4

    values = {
        (0, 0): {(CobarWord.generator((0,)), 1): ONE},
        (0, 0, 0): {(CobarWord.generator((0, 0)), 1): ONE},
    }
    bad = Derivation(1, b2, 3, values, m_valued=True)
    path = _write(tmp_path, "delta.json", derivation_to_json(bad, e1))
    report = run_command("mc-rel-check", algebra=_data("E1.json"), base=_data("B2.json"), derivation=path)
    assert report.verdict == FAIL
    assert "-2" in report.details["residual"]


def test_flat_commands(tmp_path, e2, b2):
    t1 = _write(tmp_path, "t1.json", flat_to_json(functor_F(Cochain.zero(2, 2, b2, m_only=True), e2, b2)))
    t2 = _write(tmp_path, "t2.json", flat_to_json(functor_F(x_eps(e2, b2), e2, b2)))
    inputs = {"algebra": _data("E2.json"), "base": _data("B2.json")}
    assert run_command("flat-check", flat=[t1], **inputs).verdict == PASS
    assert run_command("flat-to-mc", flat=[t2], **inputs).verdict == PASS
    same = run_command("flat-equiv", flat=[t2, t2], **inputs)
    assert same.verdict == PASS
    assert "isomorphism" in same.details


def test_validate_base(tmp_path):
    report = run_command("validate-base", base=_data("B2.json"))
    assert report.verdict == PASS
    assert report.exit_code == 0
    assert report.details["nilpotency"] == 2

    # eps * eps = 1 leaves the maximal ideal
    broken = {
        "dim": 2,
        "basis": ["1", "eps"],
        "mul": [[["1", "0"], ["0", "1"]], [["0", "1"], ["1", "0"]]],
        "nilpotency": 2,
    }
    report = run_command("validate-base", base=_write(tmp_path, "broken.json", broken))
    assert report.verdict == FAIL
    assert report.exit_code == 1
    assert "ideal" in report.details["reason"]


def test_mc_check_on_a_given_cochain(tmp_path, e2, b2):
    inputs = {"algebra": _data("E2.json"), "base": _data("B2.json")}
    report = run_command("mc-check", cochain=[_data("E2_x_eps.json")], **inputs)
    assert report.verdict == PASS
    assert report.details["residual"]["values"] == []

    bad = _write(tmp_path, "bad.json", cochain_to_json(Cochain(2, 2, b2, {(0, 1): {(0, 1): ONE}})))
    report = run_command("mc-check", cochain=[bad], **inputs)
    assert report.verdict == FAIL
    assert report.exit_code == 1
    assert report.details["residual"]["values"]


def test_gauge_act_with_a_generator(tmp_path, e2, b2):
    generator = _write(tmp_path, "f.json", cochain_to_json(Cochain(1, 2, b2, {(0,): {(0, 1): ONE}})))
    report = run_command(
        "gauge-act",
        algebra=_data("E2.json"),
        base=_data("B2.json"),
        cochain=[_data("E2_zero.json")],
        generator=generator,
    )
    assert report.verdict == PASS
    assert report.exit_code == 0
    assert report.details["result"] == cochain_to_json(minus_2y_eps(e2, b2))


def test_gauge_act_with_a_seeded_generator():
    inputs = {"algebra": _data("E2.json"), "base": _data("B2.json"), "cochain": [_data("E2_x_eps.json")], "seed": 3}
    report = run_command("gauge-act", **inputs)
    assert report.verdict == PASS
    assert report.exit_code == 0
    assert run_command("gauge-act", **inputs).to_json() == report.to_json()


def test_inconclusive_gauge_verdict_exits_with_two(monkeypatch):
    monkeypatch.setattr(
        "src.ui.commands.gauge_equivalent",
        lambda *args, **kwargs: GaugeVerdict(INCONCLUSIVE, order=2, reason="nonlinear parameter conditions at order 2"),
    )
    report = run_command(
        "gauge-equiv",
        algebra=_data("E2.json"),
        base=_data("B2.json"),
        cochain=[_data("E2_zero.json"), _data("E2_x_eps.json")],
    )
    assert report.verdict == INCONCLUSIVE
    assert report.exit_code == 2
    assert report.details["order"] == 2


# --- EXIT CODES AND OUTPUT ---

@pytest.mark.parametrize(
    "payload",
    [
        {"dim": 2, "mul": 5},
        {"dim": "2", "mul": []},
        {"dim": 2, "mul": [[1, 2], [3, 4]]},
        {"dim": 1, "mul": [[[None]]]},
        {"dim": 1, "basis": [7], "mul": [[["0"]]]},
        [1, 2],
    ],
)
def test_malformed_algebra_files_exit_with_three(tmp_path, payload):
    report = run_command("check-assoc", algebra=_write(tmp_path, "algebra.json", payload))
    assert report.verdict == ERROR
    assert report.exit_code == 3


@pytest.mark.parametrize(
    "payload",
    [
        {"arity": 2, "values": [{"in": [None, 0], "out": [["0", "0"], ["0", "0"]]}]},
        {"arity": 2, "values": [{"in": "xx", "out": [["0", "0"], ["0", "0"]]}]},
        {"arity": 2, "values": [{"in": [0, 5], "out": [["0", "0"], ["0", "0"]]}]},
        {"arity": "2", "values": []},
        {"arity": 2, "values": {"in": [0, 0]}},
        {"arity": 2, "values": [{"in": [0, 0], "out": 5}]},
        {"arity": 2, "values": [{"in": [0, 0], "out": ["00", "00"]}]},
    ],
)
def test_malformed_cochain_files_exit_with_three(tmp_path, payload):
    report = run_command(
        "mc-check", algebra=_data("E2.json"), base=_data("B2.json"), cochain=[_write(tmp_path, "beta.json", payload)]
    )
    assert report.verdict == ERROR
    assert report.exit_code == 3


@pytest.mark.parametrize(
    "payload",
    [
        {"carrier_dim": None, "b_action": [], "mul": [], "reduction": []},
        {"carrier_dim": 1, "b_action": 3, "mul": [[["0"]]], "reduction": [["1"]]},
        {"carrier_dim": 1, "b_action": [[["1"]], [["0"]]], "mul": [[["0"]]], "reduction": ["1"]},
    ],
)
def test_malformed_flat_files_exit_with_three(tmp_path, payload):
    report = run_command(
        "flat-check", algebra=_data("E1.json"), base=_data("B2.json"), flat=[_write(tmp_path, "t.json", payload)]
    )
    assert report.verdict == ERROR
    assert report.exit_code == 3


@pytest.mark.parametrize(
    "payload",
    [
        {"degree": "1", "values": []},
        {"degree": 1, "values": [{"generator": 0, "out": []}]},
        {"degree": 1, "values": [{"generator": [["x", "x"]], "out": [{"word": ["x"], "coeff": [0, 1]}]}]},
        {"degree": 1, "values": [], "m_valued": "yes"},
    ],
)
def test_malformed_derivation_files_exit_with_three(tmp_path, payload):
    report = run_command(
        "mc-rel-check",
        algebra=_data("E1.json"),
        base=_data("B2.json"),
        derivation=_write(tmp_path, "delta.json", payload),
    )
    assert report.verdict == ERROR
    assert report.exit_code == 3


def test_input_errors_exit_with_three(tmp_path):
    missing = run_command("check-assoc", algebra=str(tmp_path / "missing.json"))
    assert missing.verdict == ERROR
    assert missing.exit_code == 3
    assert run_command("no-such-command").exit_code == 3
    assert run_command("gauge-equiv", algebra=_data("E2.json"), base=_data("B2.json"), cochain=[]).exit_code == 3


def test_seeded_runs_are_reproducible():
    inputs = {"algebra": _data("E2.json"), "base": _data("B2.json"), "seed": 5, "samples": 4}
    report = run_command("mc-check", **inputs)
    assert report.verdict == PASS
    first = report.to_json()
    assert run_command("mc-check", **inputs).to_json() == first


def test_main_prints_the_report(capsys):
    code = main(["check-assoc", "--algebra", _data("E2.json")])
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload == {"command": "check-assoc", "verdict": "pass", "details": {"dim": 2}}
