"""Words in the free group F2 on a, b and what can be done with them.

Letters are the integers 0..3 standing for a, a^-1, b, b^-1 (so the inverse
of a letter is ``letter ^ 1``); lexicographic order on letters is
a < a^-1 < b < b^-1.  The text form writes inverses as capitals: "aB" is
a b^-1.

Besides reduction and balls the module holds the iterated commutator maps
psi_l, the tuple-vanishing audit on sets of words, closed-walk counting in
the 4-regular tree (Kesten), and the girth search over a pair of group
elements.
"""

from __future__ import annotations

import itertools
import logging
import math
import operator
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cache
from typing import Any

import numpy as np

from suzuki_lab.errors import CapacityError
from suzuki_lab.field import Field
from suzuki_lab.suzuki import (
    Matrix4,
    SuzukiElement,
    assemble_batch,
    is_identity_batch,
    matmul_batch,
    random_params,
    symplectic_inverse_batch,
)

logger = logging.getLogger(__name__)

A, A_INV, B, B_INV = 0, 1, 2, 3
LETTERS = (A, A_INV, B, B_INV)
_TEXT = "aAbB"

MAX_BALL_RADIUS = 14
MAX_GIRTH_RADIUS = 10
MAX_ARITY = 4
MAX_CLOSED_WALK_LENGTH = 12
EXHAUSTIVE_SET_LIMIT = 12


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


def _reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for x in letters:
        if not 0 <= x <= 3:
            msg = f"invalid letter {x!r}; letters are 0..3"
            raise ValueError(msg)
        if stack and stack[-1] == x ^ 1:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


@dataclass(frozen=True, slots=True, order=True)
class Word:
    """A freely reduced word; build through ``reduce`` or ``parse_word``."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if _reduce_letters(self.letters) != self.letters:
            msg = f"{self.letters} is not freely reduced"
            raise ValueError(msg)

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: Word) -> Word:
        return reduce(self.letters + other.letters)

    def __pow__(self, e: int) -> Word:
        base = self if e >= 0 else self.inverse()
        return reduce(base.letters * abs(e))

    def inverse(self) -> Word:
        return Word(tuple(x ^ 1 for x in reversed(self.letters)))

    def is_identity(self) -> bool:
        return not self.letters

    def to_text(self) -> str:
        return "".join(_TEXT[x] for x in self.letters) or "1"

    __str__ = to_text

    @property
    def packed(self) -> int:
        """Two bits per letter, first letter in the lowest bits."""
        value = 0
        for i, x in enumerate(self.letters):
            value |= x << (2 * i)
        return value

    @classmethod
    def from_packed(cls, value: int, length: int) -> Word:
        return cls(tuple((value >> (2 * i)) & 3 for i in range(length)))


def reduce(letters: Iterable[int]) -> Word:
    """Free reduction of a letter sequence."""
    return Word(_reduce_letters(letters))


def parse_word(text: str) -> Word:
    """Inverse of ``Word.to_text``; "1" and "" are the empty word."""
    if text in ("", "1"):
        return Word()
    try:
        return reduce(_TEXT.index(ch) for ch in text)
    except ValueError:
        msg = f"cannot parse word {text!r}; use letters from {_TEXT!r}"
        raise ValueError(msg) from None


def identity_word() -> Word:
    return Word()


def commutator_word(u: Word, v: Word) -> Word:
    """[u, v] = u^-1 v^-1 u v."""
    return reduce(u.inverse().letters + v.inverse().letters + u.letters + v.letters)


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------


def sphere(n: int) -> Iterator[Word]:
    """Reduced words of length exactly n, in lexicographic order."""
    if n == 0:
        yield Word()
        return
    stack: list[tuple[int, ...]] = [(x,) for x in reversed(LETTERS)]
    while stack:
        letters = stack.pop()
        if len(letters) == n:
            yield Word(letters)
            continue
        last_inv = letters[-1] ^ 1
        stack.extend(letters + (x,) for x in reversed(LETTERS) if x != last_inv)


def ball(L: int) -> list[Word]:
    """All reduced words of length <= L in shortlex order; 2 * 3^L - 1 of them."""
    if L < 0:
        msg = f"ball radius must be >= 0, got {L}"
        raise ValueError(msg)
    if L > MAX_BALL_RADIUS:
        msg = f"ball({L}) has {2 * 3**L - 1} words"
        raise CapacityError(msg, limit=MAX_BALL_RADIUS, hint=f"use a radius <= {MAX_BALL_RADIUS}")
    return [w for n in range(L + 1) for w in sphere(n)]


def ball_size(L: int) -> int:
    return 2 * 3**L - 1


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _inverse_of(g: Any) -> Any:
    return g.inverse()


def evaluate(
    w: Word,
    a: Any,
    b: Any,
    mul: Callable[[Any, Any], Any] = operator.mul,
    inv: Callable[[Any], Any] = _inverse_of,
    identity: Any = None,
) -> Any:
    """Image of w under a -> a, b -> b in the group given by (mul, inv).

    ``identity`` defaults to a * a^-1.
    """
    gens = (a, inv(a), b, inv(b))
    if not w.letters:
        return mul(a, gens[1]) if identity is None else identity
    result = gens[w.letters[0]]
    for x in w.letters[1:]:
        result = mul(result, gens[x])
    return result


def evaluate_matrix(w: Word, a: Matrix4, b: Matrix4) -> Matrix4:
    """``evaluate`` on raw Sz(q) matrices (no re-canonicalisation)."""
    return evaluate(
        w,
        a,
        b,
        mul=operator.matmul,
        inv=Matrix4.symplectic_inverse,
        identity=Matrix4.identity(a.field),
    )


def evaluate_batch(fld: Field, w: Word, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Evaluate w at N pairs of matrices given as two N x 4 x 4 stacks."""
    gens = (A, symplectic_inverse_batch(A), B, symplectic_inverse_batch(B))
    if not w.letters:
        return np.broadcast_to(np.eye(4, dtype=np.int64), A.shape).copy()
    result = gens[w.letters[0]].copy()
    for x in w.letters[1:]:
        result = matmul_batch(fld, result, gens[x])
    return result


# ---------------------------------------------------------------------------
# Iterated commutators
# ---------------------------------------------------------------------------


def commutator(
    x: Any,
    y: Any,
    mul: Callable[[Any, Any], Any] = operator.mul,
    inv: Callable[[Any], Any] = _inverse_of,
) -> Any:
    """[x, y] = x^-1 y^-1 x y."""
    return mul(mul(mul(inv(x), inv(y)), x), y)


def psi(
    l: int,
    elements: Sequence[Any],
    mul: Callable[[Any, Any], Any] = operator.mul,
    inv: Callable[[Any], Any] = _inverse_of,
) -> Any:
    """psi_0(g) = g, psi_l = [psi_(l-1)(left half), psi_(l-1)(right half)]."""
    if not 0 <= l <= MAX_ARITY:
        msg = f"commutator arity l={l} outside 0..{MAX_ARITY}"
        raise ValueError(msg)
    if len(elements) != 2**l:
        msg = f"psi_{l} takes {2**l} elements, got {len(elements)}"
        raise ValueError(msg)
    if l == 0:
        return elements[0]
    half = len(elements) // 2
    return commutator(
        psi(l - 1, elements[:half], mul, inv),
        psi(l - 1, elements[half:], mul, inv),
        mul,
        inv,
    )


def psi_matrix(l: int, elements: Sequence[Matrix4]) -> Matrix4:
    return psi(l, elements, mul=operator.matmul, inv=Matrix4.symplectic_inverse)


# ---------------------------------------------------------------------------
# Roots in F2
# ---------------------------------------------------------------------------


def root(w: Word) -> Word:
    """The primitive root of w (w = root^k, root not a proper power)."""
    letters = w.letters
    if not letters:
        return w
    # conjugating prefix: w = c w' c^-1 with w' cyclically reduced
    i, j = 0, len(letters) - 1
    while i < j and letters[i] == letters[j] ^ 1:
        i += 1
        j -= 1
    prefix, core = letters[:i], letters[i : j + 1]
    n = len(core)
    for p in range(1, n + 1):
        if n % p == 0 and core == core[:p] * (n // p):
            period = core[:p]
            break
    return reduce(prefix + period + tuple(x ^ 1 for x in reversed(prefix)))


def root_class(w: Word) -> Word:
    """Canonical representative of {root(w), root(w)^-1}."""
    r = root(w)
    return min(r, r.inverse(), key=lambda u: u.letters)


def commute(u: Word, v: Word) -> bool:
    return commutator_word(u, v).is_identity()


@dataclass(frozen=True)
class CommutatorPairsAudit:
    """[u, v] = 1 in F2 only when u, v are powers of one word."""

    radius: int
    pairs_checked: int
    commuting_pairs: int
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def free_commutator_pairs_audit(L: int) -> CommutatorPairsAudit:
    """Exhaustively check the centraliser fact on ball(L) x ball(L)."""
    words = [w for w in ball(L) if w.letters]
    classes = {w: root_class(w) for w in words}
    commuting = 0
    violations: list[tuple[str, str]] = []
    for u, v in itertools.product(words, repeat=2):
        if commute(u, v):
            commuting += 1
            if classes[u] != classes[v]:
                violations.append((u.to_text(), v.to_text()))
    return CommutatorPairsAudit(
        radius=L,
        pairs_checked=len(words) ** 2,
        commuting_pairs=commuting,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# Tuple vanishing (psi_l on sets of words)
# ---------------------------------------------------------------------------


def lemma_bound(l: int, L: int) -> int:
    """Explicit recursive bound 5^(2l) 4^(l^2) L^(2l) on a vanishing set."""
    return 5 ** (2 * l) * 4 ** (l * l) * L ** (2 * l)


@dataclass(frozen=True)
class VanishingAudit:
    """Outcome of ``tuple_vanishing_audit``."""

    arity: int
    set_size: int
    radius: int
    vanishes: bool
    violating_tuple: tuple[str, ...] | None
    sampled: bool
    tuples_checked: int

    @property
    def bound_ratio(self) -> float:
        """|S| / L^(2l), reported against an unspecified constant."""
        if self.radius == 0:
            return float(self.set_size)
        return self.set_size / self.radius ** (2 * self.arity)

    @property
    def explicit_bound(self) -> int:
        return lemma_bound(self.arity, self.radius)


def _psi_values(words: Sequence[Word], l: int) -> dict[Word, tuple[Word, ...]]:
    """Distinct values of psi_l over all 2^l-tuples from ``words``, with one witness tuple each."""
    values: dict[Word, tuple[Word, ...]] = {}
    for w in words:
        values.setdefault(w, (w,))
    for _ in range(l):
        nxt: dict[Word, tuple[Word, ...]] = {}
        items = list(values.items())
        for (x, tx), (y, ty) in itertools.product(items, repeat=2):
            nxt.setdefault(commutator_word(x, y), tx + ty)
        values = nxt
    return values


def tuple_vanishing_audit(
    S: Iterable[Word],
    l: int,
    *,
    samples: int = 10_000,
    rng: np.random.Generator | None = None,
) -> VanishingAudit:
    """Does psi_l vanish on every 2^l-tuple from S (computed inside F2)?

    Sets of at most 12 words are handled exhaustively: the distinct values of
    psi_(l-1) are grouped by primitive root, and psi_l vanishes on all tuples
    exactly when every pair of those values commutes.  Larger sets fall back
    to ``samples`` random tuples and the result is flagged ``sampled``.
    """
    words = sorted(set(S), key=lambda w: (len(w), w.letters))
    if not 0 <= l <= MAX_ARITY:
        msg = f"commutator arity l={l} outside 0..{MAX_ARITY}"
        raise ValueError(msg)
    radius = max((len(w) for w in words), default=0)

    if len(words) <= EXHAUSTIVE_SET_LIMIT and l <= 3:
        if l == 0:
            bad = next((w for w in words if w.letters), None)
            return VanishingAudit(
                0, len(words), radius, bad is None, None if bad is None else (bad.to_text(),), False, len(words)
            )
        values = _psi_values(words, l - 1)
        groups: dict[Word, tuple[Word, tuple[Word, ...]]] = {}
        for value, tup in values.items():
            if value.letters:
                groups.setdefault(root_class(value), (value, tup))
        violating = None
        reps = list(groups.values())
        for (x, tx), (y, ty) in itertools.combinations(reps, 2):
            if not commute(x, y):
                violating = tuple(w.to_text() for w in tx + ty)
                break
        return VanishingAudit(
            arity=l,
            set_size=len(words),
            radius=radius,
            vanishes=violating is None,
            violating_tuple=violating,
            sampled=False,
            tuples_checked=len(words) ** (2**l),
        )

    if rng is None:
        msg = "sampled tuple audit needs an rng"
        raise ValueError(msg)
    if not words:
        return VanishingAudit(l, 0, 0, True, None, True, 0)
    picks = rng.integers(0, len(words), size=(samples, 2**l))
    for row in picks:
        tup = [words[i] for i in row]
        if not psi(l, tup).is_identity():
            return VanishingAudit(
                l, len(words), radius, False, tuple(w.to_text() for w in tup), True, samples
            )
    return VanishingAudit(l, len(words), radius, True, None, True, samples)


# ---------------------------------------------------------------------------
# Closed walks (Kesten)
# ---------------------------------------------------------------------------


@cache
def _closed_from(state: tuple[int, ...], remaining: int) -> int:
    """Strings of ``remaining`` letters that reduce ``state`` to the empty word."""
    if len(state) > remaining:
        return 0
    if remaining == 0:
        return 1
    total = 0
    for x in LETTERS:
        if state and state[-1] == x ^ 1:
            total += _closed_from(state[:-1], remaining - 1)
        else:
            total += _closed_from(state + (x,), remaining - 1)
    return total


def count_closed_walks(n: int) -> int:
    """Number of length-n strings over a, a^-1, b, b^-1 that freely reduce to 1.

    The string tree is walked letter by letter; subtrees with the same
    partially reduced word and remaining length are counted once.
    """
    if n < 0:
        msg = f"walk length must be >= 0, got {n}"
        raise ValueError(msg)
    if n > MAX_CLOSED_WALK_LENGTH:
        msg = f"closed-walk enumeration limited to n <= {MAX_CLOSED_WALK_LENGTH}"
        raise CapacityError(msg, limit=MAX_CLOSED_WALK_LENGTH, hint="use tree_return_count for longer walks")
    return _closed_from((), n)


def tree_return_count(n: int) -> int:
    """Closed walks of length n from the root of the 4-regular tree, by distance recursion."""
    ways = [1] + [0] * n
    for _ in range(n):
        nxt = [0] * (n + 1)
        for d, c in enumerate(ways):
            if not c:
                continue
            if d == 0:
                nxt[1] += 4 * c
            else:
                nxt[d - 1] += c
                if d + 1 <= n:
                    nxt[d + 1] += 3 * c
        ways = nxt
    return ways[0]


@dataclass(frozen=True)
class KestenReport:
    length: int
    closed_walks: int
    tree_count: int

    @property
    def bound(self) -> float:
        return (2 * math.sqrt(3)) ** self.length

    @property
    def within_bound(self) -> bool:
        # count <= (2 sqrt 3)^n  <=>  count^2 <= 12^n
        return self.closed_walks**2 <= 12**self.length

    @property
    def ratio(self) -> float:
        return self.closed_walks / self.bound

    @property
    def return_probability(self) -> float:
        return self.closed_walks / 4**self.length


def kesten_ratio(n: int) -> KestenReport:
    return KestenReport(n, count_closed_walks(n), tree_return_count(n))


# ---------------------------------------------------------------------------
# Girth
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GirthResult:
    """``passed`` is True when no nontrivial word of length <= radius is a relation."""

    radius: int
    passed: bool
    relation: Word | None
    words_checked: int

    @property
    def relation_text(self) -> str | None:
        return None if self.relation is None else self.relation.to_text()


def girth_test(a: SuzukiElement, b: SuzukiElement, L: int) -> GirthResult:
    """Search ball(L) for a relation w(a, b) = 1, shortest first.

    Reduced words are extended one letter per level with their running
    products kept in one batch, so a level costs one batched product per
    generator.  Within a level words are visited in lexicographic order, so
    the relation returned is the shortlex-least one.
    """
    if not 0 <= L <= MAX_GIRTH_RADIUS:
        msg = f"girth radius L={L} outside 0..{MAX_GIRTH_RADIUS}"
        raise CapacityError(msg, limit=MAX_GIRTH_RADIUS, hint=f"use L <= {MAX_GIRTH_RADIUS}")
    fld = a.field
    gens = [np.asarray(g.entries, dtype=np.int64).reshape(4, 4) for g in
            (a.matrix, a.matrix.symplectic_inverse(), b.matrix, b.matrix.symplectic_inverse())]  # fmt: skip
    letters = np.zeros((1, 0), dtype=np.uint8)
    mats = np.eye(4, dtype=np.int64)[None]
    checked = 0
    for length in range(1, L + 1):
        children = np.stack([matmul_batch(fld, mats, g) for g in gens], axis=1)
        n = len(letters)
        if length == 1:
            valid = np.ones((n, 4), dtype=bool)
        else:
            valid = np.arange(4)[None, :] != (letters[:, -1:] ^ 1)
        parent = np.repeat(np.arange(n), 4).reshape(n, 4)[valid]
        letter = np.tile(np.arange(4, dtype=np.uint8), (n, 1))[valid]
        mats = children[valid]
        letters = np.concatenate([letters[parent], letter[:, None]], axis=1)
        checked += len(mats)
        hits = np.flatnonzero(is_identity_batch(mats))
        if len(hits):
            relation = Word(tuple(int(x) for x in letters[hits[0]]))
            logger.debug("relation %s of length %d", relation, length)
            return GirthResult(L, False, relation, checked)
    return GirthResult(L, True, None, checked)


# ---------------------------------------------------------------------------
# Relation probability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationProbability:
    """Monte Carlo P(a, b outside B and w(a, b) = 1)."""

    word: str
    q: int
    samples: int
    hits: int

    @property
    def estimate(self) -> float:
        return self.hits / self.samples if self.samples else 0.0

    @property
    def half_width(self) -> float:
        p = self.estimate
        return 1.96 * math.sqrt(max(p * (1 - p), 1e-300) / self.samples) if self.samples else 0.0

    @property
    def bound_shape(self) -> float:
        """q^(-1/2) log q."""
        return self.q**-0.5 * math.log(self.q)


def relation_probability(w: Word, fld: Field, samples: int, rng: np.random.Generator) -> RelationProbability:
    """Fraction of uniform big-cell pairs (a, b) with w(a, b) = 1."""
    pa = random_params(fld, rng, samples, big_cell_only=True)
    pb = random_params(fld, rng, samples, big_cell_only=True)
    values = evaluate_batch(fld, w, assemble_batch(pa), assemble_batch(pb))
    hits = int(is_identity_batch(values).sum())
    return RelationProbability(w.to_text(), fld.q, samples, hits)


@dataclass(frozen=True)
class GirthUnionBound:
    """q^(kappa log 3 - 1/2) log q: chance some word of length <= kappa log q is a relation."""

    q: int
    kappa: float

    @property
    def value(self) -> float:
        return self.q ** (self.kappa * math.log(3) - 0.5) * math.log(self.q)

    @property
    def kappa_threshold(self) -> float:
        return 1 / (2 * math.log(3))

    @property
    def kappa_admissible(self) -> bool:
        return self.kappa < self.kappa_threshold

    @property
    def radius(self) -> int:
        return math.floor(self.kappa * math.log(self.q))


def girth_union_bound(q: int, kappa: float) -> GirthUnionBound:
    return GirthUnionBound(q, kappa)
