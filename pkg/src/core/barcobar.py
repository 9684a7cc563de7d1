import itertools
import logging
from dataclasses import dataclass, field

from .algebra import ground_field
from .errors import InputError, TruncationError
from .exact import ONE, SparseMatrix, accumulate, format_rational, rank
from .hochschild import product_cochain

LOGGER = logging.getLogger(__name__)

# A bar word m_1 (x) ... (x) m_n is a nonempty tuple of A-basis indices; as a
# generator of the cobar algebra it is the block up(m_1 ... m_n) of degree 1 - n.
# Chains (formal sums with B-coefficients) are dicts {(CobarWord, b): coefficient}.


@dataclass(frozen=True)
class CobarWord:
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(block) for block in self.blocks)
        if not blocks or any(not block for block in blocks):
            raise InputError(f"A cobar word needs nonempty blocks, got {self.blocks!r}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def generator(cls, letters):
        return cls((tuple(letters),))

    @property
    def polydegree(self):
        return sum(len(block) for block in self.blocks)

    @property
    def arrows(self):
        return len(self.blocks)

    @property
    def degree(self):
        return self.arrows - self.polydegree

    @property
    def letters(self):
        return tuple(itertools.chain.from_iterable(self.blocks))

    def sort_key(self):
        return (self.polydegree, tuple(len(block) for block in self.blocks), self.letters)

    def __mul__(self, other):
        return CobarWord(self.blocks + other.blocks)

    def label(self, names):
        return [[names[m] for m in block] for block in self.blocks]


def compositions(n, parts):
    """ Compositions of n into `parts` positive parts, lexicographically. """
    if parts < 1 or parts > n:
        return
    for cuts in itertools.combinations(range(1, n), parts - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(bounds[k + 1] - bounds[k] for k in range(parts))


def _split(letters, composition):
    blocks = []
    start = 0
    for size in composition:
        blocks.append(letters[start:start + size])
        start += size
    return tuple(blocks)


def enumerate_words(dim, word_bound, degree):
    """ Cobar words of the given degree and polydegree <= word_bound, ordered by sort_key. """
    if word_bound < 1 or degree > 0:
        raise InputError(f"Need word bound >= 1 and degree <= 0, got W={word_bound}, degree={degree}")
    words = []
    for n in range(1, word_bound + 1):
        for composition in compositions(n, n + degree):
            for letters in itertools.product(range(dim), repeat=n):
                words.append(CobarWord(_split(letters, composition)))
    return words


# --- DIFFERENTIAL ON GENERATORS ---

def split_terms(block):
    """ d_s(up(m_1...m_n)) = sum_j (-1)^j up(m_1...m_j) (x) up(m_(j+1)...m_n). """
    out = {}
    for j in range(1, len(block)):
        word = CobarWord((block[:j], block[j:]))
        accumulate(out, (word, 0), -ONE if j % 2 else ONE)
    return out


def merge_terms(block, product):
    """ d_sw(up(m_1...m_n)) = sum_j (-1)^(j-1) up(... m_j m_(j+1) ...), products taken by `product`. """
    out = {}
    for j in range(1, len(block)):
        sign = ONE if j % 2 else -ONE
        for (l, b), c in product.evaluate((block[j - 1], block[j])).items():
            letters = block[:j - 1] + (l,) + block[j + 1:]
            accumulate(out, (CobarWord.generator(letters), b), sign * c)
    return out


def generator_differential(block, product):
    out = split_terms(block)
    for key, c in merge_terms(block, product).items():
        accumulate(out, key, c)
    return out


# --- DERIVATION EXTENSION ---

def extend_derivation(word, degree, on_generator):
    """ Leibniz rule: passing a block of degree g costs (-1)^(degree * g). """
    out = {}
    passed = 0
    for i, block in enumerate(word.blocks):
        negate = degree * passed % 2 == 1
        for (value, b), c in on_generator(block).items():
            new = CobarWord(word.blocks[:i] + value.blocks + word.blocks[i + 1:])
            accumulate(out, (new, b), -c if negate else c)
        passed += 1 - len(block)
    return out


def apply_derivation(chain, degree, on_generator, base):
    out = {}
    for (word, b0), c0 in chain.items():
        for (new, b), c in extend_derivation(word, degree, on_generator).items():
            for b2, s in base.table[b0][b].items():
                accumulate(out, (new, b2), c0 * c * s)
    return out


def apply_linear(chain, on_word, base):
    """ Extends a map on words (returning chains) B-linearly. """
    out = {}
    for (word, b0), c0 in chain.items():
        for (new, b), c in on_word(word).items():
            for b2, s in base.table[b0][b].items():
                accumulate(out, (new, b2), c0 * c * s)
    return out


def multiply_chains(left, right, base):
    out = {}
    for (w1, b1), c1 in left.items():
        for (w2, b2), c2 in right.items():
            for b, s in base.table[b1][b2].items():
                accumulate(out, (w1 * w2, b), c1 * c2 * s)
    return out


class GeneratorCache:
    """ Memoizes a generator map; blocks repeat across the words of a complex. """

    def __init__(self, fn):
        self._fn = fn
        self._cache = {}

    def __call__(self, block):
        if block not in self._cache:
            self._cache[block] = self._fn(block)
        return self._cache[block]


def differential_on_generators(alg, base=None, beta=None):
    """ s (or s with the product alpha + beta) as a map on generator blocks. """
    base = base or ground_field()
    product = product_cochain(alg, base)
    if beta is not None:
        product = product + beta
    return GeneratorCache(lambda block: generator_differential(block, product))


def cobar_differential(word, alg, base=None, beta=None):
    return extend_derivation(word, 1, differential_on_generators(alg, base, beta))


def split_differential(word):
    """ d_s alone, the differential of the associated graded rows. """
    return extend_derivation(word, 1, split_terms)


# --- PROJECTION AND HOMOTOPY ---

def projection_p(word, alg):
    """ Product of the letters of a degree-0 word as {l: coefficient}; zero in other degrees. """
    if word.degree != 0:
        return {}
    letters = word.letters
    value = {letters[0]: ONE}
    for m in letters[1:]:
        value = alg.multiply(value, {m: ONE})
    return value


def project_chain(chain, alg):
    """ p on a chain: an element {(l, b): coefficient} of A (x) B. """
    out = {}
    for (word, b), c in chain.items():
        for l, a in projection_p(word, alg).items():
            accumulate(out, (l, b), c * a)
    return out


def splitting_homotopy(word):
    """ h(up m (x) up(w) (x) rest) = -up(m w) (x) rest; zero when the first block is longer. """
    if word.arrows < 2 or len(word.blocks[0]) != 1:
        return {}
    merged = CobarWord((word.blocks[0] + word.blocks[1],) + word.blocks[2:])
    return {(merged, 0): -ONE}


def homotopy_defects(dim, polydegree):
    """ Words of the given polydegree on which h d_s + d_s h differs from the identity. """
    ground = ground_field()
    failures = []
    for arrows in range(1, polydegree + 1):
        for word in enumerate_words(dim, polydegree, arrows - polydegree):
            if word.polydegree != polydegree:
                continue
            total = apply_linear(split_differential(word), splitting_homotopy, ground)
            for key, c in apply_linear(splitting_homotopy(word), split_differential, ground).items():
                accumulate(total, key, c)
            if total != {(word, 0): ONE}:
                failures.append(word)
    return failures


# --- TRUNCATED COMPLEXES ---

@dataclass(frozen=True)
class TruncatedComplex:
    """
    Polydegree <= W slice of the cobar resolution over B. Cells of degree i are
    pairs (word, b), indexed word-major; differential_matrices[i] maps degree i to i + 1.
    """
    word_bound: int
    base_dim: int
    graded_basis: dict
    differential_matrices: dict = field(default_factory=dict)

    def cells(self, degree):
        return [(word, b) for word in self.graded_basis.get(degree, []) for b in range(self.base_dim)]

    def cell_index(self, degree):
        return {cell: k for k, cell in enumerate(self.cells(degree))}

    @property
    def degrees(self):
        return sorted(self.graded_basis)

    def square_defects(self):
        """ Degrees i where d_(i+1) d_i is nonzero, with the offending products. """
        defects = {}
        for i, first in self.differential_matrices.items():
            second = self.differential_matrices.get(i + 1)
            if second is None:
                continue
            composite = second.matmul(first)
            if not composite.is_zero():
                defects[i] = composite
        return defects

    def is_square_zero(self):
        return not self.square_defects()


def assemble_complex(dim, word_bound, base, on_generator):
    """ Matrices of the degree-1 derivation given on generators, restricted to polydegree <= W. """
    graded_basis = {i: enumerate_words(dim, word_bound, i) for i in range(1 - word_bound, 1)}
    skeleton = TruncatedComplex(word_bound, base.dim, graded_basis)
    matrices = {}
    for i in range(1 - word_bound, 0):
        target = skeleton.cell_index(i + 1)
        columns = []
        for word, b in skeleton.cells(i):
            column = {}
            for (new, b2), c in apply_derivation({(word, b): ONE}, 1, on_generator, base).items():
                if (new, b2) not in target:
                    raise TruncationError(f"Differential leaves polydegree <= {word_bound} at {new.blocks}")
                column[target[(new, b2)]] = c
            columns.append(column)
        matrices[i] = SparseMatrix.from_columns(len(target), columns)
        LOGGER.debug(f"Assembled degree {i} -> {i + 1}: {len(columns)} columns, {len(target)} rows")
    return TruncatedComplex(word_bound, base.dim, graded_basis, matrices)


def build_complex(alg, word_bound, base=None, beta=None):
    base = base or ground_field()
    return assemble_complex(alg.dim, word_bound, base, differential_on_generators(alg, base, beta))


def cohomology_dimension(complex_, degree):
    size = len(complex_.cells(degree))
    outgoing = complex_.differential_matrices.get(degree)
    incoming = complex_.differential_matrices.get(degree - 1)
    cocycles = size - (rank(outgoing) if outgoing is not None else 0)
    return cocycles - (rank(incoming) if incoming is not None else 0)


def dump_complex(complex_, alg, base=None):
    base = base or ground_field()
    degrees = {}
    for i in complex_.degrees:
        matrix = complex_.differential_matrices.get(i)
        degrees[str(i)] = {
            "basis": [
                {"word": word.label(alg.basis_names), "b": base.basis_names[b]} for word, b in complex_.cells(i)
            ],
            "differential": [
                [row, col, format_rational(value)] for (row, col), value in sorted(matrix.entries.items())
            ]
            if matrix is not None
            else [],
        }
    return {"word_bound": complex_.word_bound, "degrees": degrees}
