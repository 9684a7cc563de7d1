import json
import logging

from .algebra import ArtinLocalAlgebra, FiniteAlgebra
from .barcobar import CobarWord
from .errors import InputError
from .exact import SparseMatrix, format_rational, rational
from .flat import FlatDeformation
from .hochschild import Cochain
from .relations import Derivation

LOGGER = logging.getLogger(__name__)


def load_json(path):
    """ Loads a JSON input file, turning I/O and syntax problems into InputError. """
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"Malformed JSON in {path}: {e}") from e


def dumps(payload):
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def _require(data, *keys):
    if not isinstance(data, dict):
        raise InputError(f"Expected a JSON object, got {type(data).__name__}")
    missing = [k for k in keys if k not in data]
    if missing:
        raise InputError(f"Missing keys: {', '.join(missing)}")


def _integer(data, key, minimum=None):
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{key!r} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise InputError(f"{key!r} must be >= {minimum}, got {value}")
    return value


def _list(value, what):
    if not isinstance(value, list):
        raise InputError(f"{what} must be a JSON list, got {type(value).__name__}")
    return value


def _nested(value, depth, what):
    """ Rationals nested `depth` lists deep. """
    if depth == 0:
        return rational(value)
    return [_nested(x, depth - 1, what) for x in _list(value, what)]


def _names(data, default):
    names = data.get("basis")
    if names is None:
        return default
    if not all(isinstance(n, str) for n in _list(names, "basis")):
        raise InputError("Basis names must be strings")
    return names


def _strings(nested):
    if isinstance(nested, (list, tuple)):
        return [_strings(x) for x in nested]
    return format_rational(nested)


# --- ALGEBRAS ---

def algebra_from_json(data):
    _require(data, "dim", "mul")
    if data.get("unital"):
        raise InputError("Unital algebras are not supported; omit the unital flag")
    dim = _integer(data, "dim", minimum=1)
    names = _names(data, [f"e{i}" for i in range(dim)])
    return FiniteAlgebra(dim, tuple(names), _nested(data["mul"], 3, "mul"))


def algebra_to_json(alg):
    return {"dim": alg.dim, "basis": list(alg.basis_names), "mul": _strings(alg.structure_constants)}


def base_from_json(data):
    _require(data, "dim", "mul", "nilpotency")
    if data.get("unit_index", 0) != 0:
        raise InputError("The unit of the base must be basis vector 0")
    dim = _integer(data, "dim", minimum=1)
    names = _names(data, ["1"] + [f"m{i}" for i in range(1, dim)])
    return ArtinLocalAlgebra(dim, tuple(names), _nested(data["mul"], 3, "mul"), _integer(data, "nilpotency", 1))


def base_to_json(base):
    payload = algebra_to_json(base)
    payload.update({"unit_index": 0, "nilpotency": base.nilpotency})
    return payload


# --- COCHAINS ---

def _letter(value, alg):
    if isinstance(value, str):
        if value not in alg.basis_names:
            raise InputError(f"Unknown basis element {value!r}")
        return alg.basis_names.index(value)
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < alg.dim:
        raise InputError(f"Basis element must be a name or an index below {alg.dim}, got {value!r}")
    return value


def _element_from_matrix(matrix, alg, base):
    """ dim A x dim B matrix of rationals -> {(l, b): coefficient}. """
    matrix = _nested(matrix, 2, "out")
    if len(matrix) != alg.dim or any(len(row) != base.dim for row in matrix):
        raise InputError(f"Output must be a {alg.dim}x{base.dim} matrix")
    return {(l, b): c for l, row in enumerate(matrix) for b, c in enumerate(row) if c}


def _element_to_matrix(element, alg_dim, base_dim):
    rows = [["0"] * base_dim for _ in range(alg_dim)]
    for (l, b), c in element.items():
        rows[l][b] = format_rational(c)
    return rows


def cochain_from_json(data, alg, base):
    _require(data, "arity", "values")
    arity = _integer(data, "arity", minimum=1)
    values = {}
    for entry in _list(data["values"], "values"):
        _require(entry, "in", "out")
        key = tuple(_letter(i, alg) for i in _list(entry["in"], "in"))
        if key in values:
            raise InputError(f"Duplicate cochain input {key}")
        values[key] = _element_from_matrix(entry["out"], alg, base)
    return Cochain(arity, alg.dim, base, values)


def cochain_to_json(c):
    return {
        "arity": c.arity,
        "values": [
            {"in": list(key), "out": _element_to_matrix(value, c.dim, c.base.dim)}
            for key, value in sorted(c.values.items())
        ],
    }


# --- DERIVATIONS ---

def _word(data, alg):
    if not isinstance(data, list) or not data:
        raise InputError(f"A word is a nonempty list of blocks, got {data!r}")
    return CobarWord(tuple(tuple(_letter(m, alg) for m in _list(block, "block")) for block in data))


def _b_vector(data, base):
    if isinstance(data, list):
        if len(data) != base.dim:
            raise InputError(f"B-coefficient vectors have length {base.dim}")
        return {b: rational(c) for b, c in enumerate(data) if rational(c)}
    return {0: rational(data)} if rational(data) else {}


def derivation_from_json(data, alg, base, word_bound):
    _require(data, "degree", "values")
    degree = _integer(data, "degree")
    values = {}
    for entry in _list(data["values"], "values"):
        _require(entry, "generator", "out")
        generator = _list(entry["generator"], "generator")
        if generator and isinstance(generator[0], list):
            if len(generator) != 1:
                raise InputError("A generator is a single block")
            generator = generator[0]
        block = tuple(_letter(m, alg) for m in generator)
        chain = values.setdefault(block, {})
        for term in _list(entry["out"], "out"):
            _require(term, "word", "coeff")
            word = _word(term["word"], alg)
            for b, c in _b_vector(term["coeff"], base).items():
                chain[(word, b)] = chain.get((word, b), 0) + c
    m_valued = data.get("m_valued")
    if m_valued is None:
        m_valued = all(b != 0 for chain in values.values() for _, b in chain)
    elif not isinstance(m_valued, bool):
        raise InputError(f"'m_valued' must be true or false, got {m_valued!r}")
    return Derivation(degree, base, word_bound, values, m_valued)


def chain_to_json(chain, alg, base):
    by_word = {}
    for (word, b), c in chain.items():
        by_word.setdefault(word, ["0"] * base.dim)[b] = format_rational(c)
    return [
        {"word": word.label(alg.basis_names), "coeff": coeff}
        for word, coeff in sorted(by_word.items(), key=lambda item: item[0].sort_key())
    ]


def derivation_to_json(d, alg):
    return {
        "degree": d.degree,
        "m_valued": d.m_valued,
        "values": [
            {"generator": [[alg.basis_names[m] for m in block]], "out": chain_to_json(chain, alg, d.base)}
            for block, chain in sorted(d.generator_values.items(), key=lambda item: (len(item[0]), item[0]))
        ],
    }


# --- MATRICES AND FLAT DEFORMATIONS ---

def matrix_from_json(rows):
    return SparseMatrix.from_dense(_nested(rows, 2, "matrix"))


def matrix_to_json(m):
    return _strings(m.to_dense())


def flat_from_json(data, alg, base):
    _require(data, "carrier_dim", "b_action", "mul", "reduction")
    n = _integer(data, "carrier_dim", minimum=1)
    names = _names(data, [f"u{k}" for k in range(n)])
    product = FiniteAlgebra(n, tuple(names), _nested(data["mul"], 3, "mul"))
    b_action = [matrix_from_json(m) for m in _list(data["b_action"], "b_action")]
    reduction = matrix_from_json(data["reduction"])
    if reduction.rows == 0 and alg.dim:
        raise InputError("Empty reduction matrix")
    return FlatDeformation(n, b_action, product, reduction)


def flat_to_json(t):
    return {
        "carrier_dim": t.carrier_dim,
        "b_action": [matrix_to_json(m) for m in t.b_action],
        "mul": _strings(t.product.structure_constants),
        "reduction": matrix_to_json(t.reduction),
    }
