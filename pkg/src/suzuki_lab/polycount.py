"""Zeros of twisted polynomials P(x_1..x_k, x_1^theta..x_k^theta).

``BiPoly`` is an explicit p(x, y) whose twisted zeros x with p(x, x^theta) = 0
are counted exactly by substituting y = x^theta and counting roots of the
resulting univariate polynomial.  ``TwistedPolynomial`` is a black box with a
per-variable degree bound: it is evaluated on batches of points and never
expanded, which is what the word polynomials (10 variables, degree
proportional to the word length) need.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from suzuki_lab.errors import CapacityError, FieldError, InternalConsistencyError
from suzuki_lab.field import Field, UniPoly, count_roots
from suzuki_lab.suzuki import (
    assemble_batch,
    charpoly_batch,
    is_identity_batch,
    matmul_batch,
    random_params,
    symplectic_inverse_batch,
    u_batch,
)
from suzuki_lab.words import A, B, Word, evaluate_batch

logger = logging.getLogger(__name__)

EXACT_GRID_LIMIT = 1 << 24
GRID_CHUNK = 1 << 16
EXHAUSTIVE_TWIST_Q = 512
BIG_CELL_VARIABLES = 5


# ---------------------------------------------------------------------------
# Bivariate polynomials
# ---------------------------------------------------------------------------


def _trim(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    grid = [list(r) for r in rows]
    width = max((len(r) for r in grid), default=0)
    grid = [r + [0] * (width - len(r)) for r in grid]
    while grid and not any(grid[-1]):
        grid.pop()
    while grid and grid[0] and not any(r[-1] for r in grid):
        grid = [r[:-1] for r in grid]
    return tuple(tuple(r) for r in grid)


@dataclass(frozen=True)
class BiPoly:
    """p(x, y) = sum coeffs[i][j] x^i y^j, trimmed of zero top rows and columns."""

    field: Field
    coeffs: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @property
    def degree_x(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree_y(self) -> int:
        return len(self.coeffs[0]) - 1 if self.coeffs else -1

    @property
    def degree(self) -> int:
        """Per-variable degree bound max(deg_x, deg_y)."""
        return max(self.degree_x, self.degree_y)

    def is_zero(self) -> bool:
        return not self.coeffs

    def terms(self) -> list[tuple[int, int, int]]:
        return [(i, j, c) for i, row in enumerate(self.coeffs) for j, c in enumerate(row) if c]

    def __call__(self, x: int, y: int) -> int:
        fld = self.field
        return _xor_all(fld.mul(c, fld.mul(fld.pow(x, i), fld.pow(y, j))) for i, j, c in self.terms())

    def twisted(self) -> UniPoly:
        """p(x, x^theta) as a univariate polynomial of degree <= d (theta + 1)."""
        th = self.field.theta_exponent
        out: dict[int, int] = {}
        for i, j, c in self.terms():
            e = i + th * j
            out[e] = out.get(e, 0) ^ c
        size = max(out, default=-1) + 1
        return UniPoly(self.field, tuple(out.get(e, 0) for e in range(size)))

    def twisted_values(self) -> np.ndarray:
        """p(x, x^theta) at every x in the field."""
        return _bipoly_values(self.field, np.array([_dense(self)]))[0]


def _xor_all(values) -> int:
    acc = 0
    for v in values:
        acc ^= v
    return acc


def _dense(p: BiPoly, d: int | None = None) -> np.ndarray:
    d = p.degree if d is None else d
    grid = np.zeros((d + 1, d + 1), dtype=np.int64)
    for i, j, c in p.terms():
        grid[i, j] = c
    return grid


def _bipoly_values(fld: Field, coeffs: np.ndarray) -> np.ndarray:
    """Twisted values of S polynomials given as an S x (d+1) x (d+1) coefficient array, at every x."""
    q = fld.q
    order = q - 1
    log, exp = fld._log_np, fld._exp_np
    xs = np.arange(1, q, dtype=np.int64)
    logx = log[xs]
    th = fld.theta_exponent
    S = coeffs.shape[0]
    values = np.zeros((S, q), dtype=np.int64)
    values[:, 0] = coeffs[:, 0, 0]
    body = np.zeros((S, q - 1), dtype=np.int64)
    for i, j in itertools.product(range(coeffs.shape[1]), range(coeffs.shape[2])):
        c = coeffs[:, i, j]
        nz = c != 0
        if not nz.any():
            continue
        e = (i + th * j) * logx % order
        term = exp[(log[c][:, None] + e[None, :]) % order]
        term[~nz] = 0
        body ^= term
    values[:, 1:] = body
    return values


def twisted_root_count(p: BiPoly) -> int:
    """#{x in GF(q) : p(x, x^theta) = 0}, via roots of the substituted polynomial."""
    if p.is_zero():
        msg = "twisted root count of the zero polynomial is undefined"
        raise FieldError(msg)
    uni = p.twisted()
    if uni.is_zero():
        return p.field.q
    return count_roots(uni)


def twisted_root_count_exhaustive(p: BiPoly) -> int:
    if p.is_zero():
        msg = "twisted root count of the zero polynomial is undefined"
        raise FieldError(msg)
    return int(np.count_nonzero(p.twisted_values() == 0))


def random_bipoly(fld: Field, d: int, rng: np.random.Generator) -> BiPoly:
    """Uniform coefficients in degree <= d per variable, resampled while zero."""
    while True:
        grid = rng.integers(0, fld.q, size=(d + 1, d + 1))
        if grid.any():
            return BiPoly(fld, tuple(tuple(int(c) for c in row) for row in grid))


@dataclass(frozen=True)
class TwistAudit:
    """max twisted root count over random nonzero p against 2 d^2."""

    q: int
    d: int
    samples: int
    max_count: int
    witness: tuple[tuple[int, ...], ...]
    violations: int
    cross_checked: int

    @property
    def bound(self) -> int:
        return 2 * self.d * self.d

    @property
    def weak_bound(self) -> int:
        """d (theta + 1), the bound from substitution alone."""
        m = self.q.bit_length() - 1
        return self.d * (2 ** ((m + 1) // 2) + 1)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def harder_twist_audit(
    fld: Field, d: int, samples: int, rng: np.random.Generator, *, exhaustive_limit: int = EXHAUSTIVE_TWIST_Q
) -> TwistAudit:
    """Twisted root counts of ``samples`` random nonzero p with degree <= d per variable.

    Counts come from the gcd root count of p(x, x^theta).  Over fields with
    q <= ``exhaustive_limit`` every polynomial is also evaluated at all x and
    the two counts must agree.
    """
    if d < 1:
        msg = f"degree bound must be >= 1, got {d}"
        raise ValueError(msg)
    max_count, witness, violations, checked = -1, None, 0, 0
    bound = 2 * d * d
    done = 0
    chunk = max(1, GRID_CHUNK // fld.q)
    while done < samples:
        size = min(chunk, samples - done)
        coeffs = rng.integers(0, fld.q, size=(size, d + 1, d + 1))
        zero = ~coeffs.reshape(size, -1).any(axis=1)
        while zero.any():
            coeffs[zero] = rng.integers(0, fld.q, size=(int(zero.sum()), d + 1, d + 1))
            zero = ~coeffs.reshape(size, -1).any(axis=1)
        polys = [BiPoly(fld, tuple(tuple(int(c) for c in row) for row in grid)) for grid in coeffs]
        counts = np.array([twisted_root_count(p) for p in polys], dtype=np.int64)
        if fld.q <= exhaustive_limit:
            oracle = np.count_nonzero(_bipoly_values(fld, coeffs) == 0, axis=1)
            bad = np.flatnonzero(oracle != counts)
            if len(bad):
                p = polys[bad[0]]
                msg = f"gcd and exhaustive twisted root counts disagree for {p.coeffs} over {fld}"
                raise InternalConsistencyError(msg)
            checked += size
        violations += int((counts > bound).sum())
        top = int(np.argmax(counts))
        if counts[top] > max_count:
            max_count = int(counts[top])
            witness = polys[top].coeffs
        done += size
    logger.debug("twist audit q=%d d=%d: max count %d (bound %d)", fld.q, d, max_count, bound)
    return TwistAudit(fld.q, d, samples, max(max_count, 0), witness or (), violations, checked)


def strong_twist_bound(k: int, d: int, q: int) -> float:
    """2 k d^2 / q: zero probability using the 2 d^2 root count."""
    return 2 * k * d * d / q


def explicit_twist_bound(k: int, d: int, fld: Field) -> float:
    """k d (theta + 1) / q."""
    return k * d * (fld.theta_exponent + 1) / fld.q


# ---------------------------------------------------------------------------
# Twisted polynomials (black box)
# ---------------------------------------------------------------------------


Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TwistedPolynomial:
    """Black-box P evaluated on an N x k array of points, degree <= ``degree`` in each of
    x_i and x_i^theta."""

    field: Field
    k: int
    degree: int
    evaluator: Evaluator = field(repr=False)
    label: str = ""
    witness: tuple[int, ...] | None = None

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.int64))
        if pts.shape[1] != self.k:
            msg = f"{self.label or 'polynomial'} takes {self.k} variables, got {pts.shape[1]}"
            raise ValueError(msg)
        return self.evaluator(pts)

    @property
    def certified(self) -> bool:
        return self.witness is not None

    def __add__(self, other: TwistedPolynomial) -> TwistedPolynomial:
        _check_compatible(self, other)
        f, g = self.evaluator, other.evaluator
        return TwistedPolynomial(
            self.field, self.k, max(self.degree, other.degree), lambda x: f(x) ^ g(x), f"({self.label}+{other.label})"
        )

    def __mul__(self, other: TwistedPolynomial) -> TwistedPolynomial:
        _check_compatible(self, other)
        f, g, mul = self.evaluator, other.evaluator, self.field.mul_array
        return TwistedPolynomial(
            self.field, self.k, self.degree + other.degree, lambda x: mul(f(x), g(x)), f"{self.label}*{other.label}"
        )

    def with_witness(self, witness: tuple[int, ...]) -> TwistedPolynomial:
        return TwistedPolynomial(self.field, self.k, self.degree, self.evaluator, self.label, witness)


def _check_compatible(p: TwistedPolynomial, r: TwistedPolynomial) -> None:
    if p.field != r.field or p.k != r.k:
        msg = "twisted polynomials over different fields or variable counts"
        raise ValueError(msg)


def coordinate(fld: Field, k: int, i: int) -> TwistedPolynomial:
    """x_i."""
    return TwistedPolynomial(fld, k, 1, lambda x: x[:, i].copy(), f"x{i + 1}")


def theta_coordinate(fld: Field, k: int, i: int) -> TwistedPolynomial:
    """x_i^theta."""
    return TwistedPolynomial(fld, k, 1, lambda x: fld.theta_array(x[:, i]), f"x{i + 1}^t")


def constant(fld: Field, k: int, c: int) -> TwistedPolynomial:
    return TwistedPolynomial(fld, k, 0, lambda x: np.full(len(x), c, dtype=np.int64), str(c))


def random_twisted_polynomial(fld: Field, k: int, d: int, rng: np.random.Generator) -> TwistedPolynomial:
    """Uniform coefficients on all monomials prod x_i^e_i (x_i^theta)^f_i with e_i, f_i <= d."""
    exps = np.array(list(itertools.product(range(d + 1), repeat=2 * k)), dtype=np.int64)
    coeffs = rng.integers(0, fld.q, size=len(exps))
    while not coeffs.any():
        coeffs = rng.integers(0, fld.q, size=len(exps))
    keep = coeffs != 0
    exps, coeffs = exps[keep], coeffs[keep]
    order = fld.q - 1
    th = fld.theta_exponent
    # exponent of x_i in each monomial once x_i^theta is folded in
    weights = exps[:, :k] + th * exps[:, k:]
    log, exp = fld._log_np, fld._exp_np
    logc = log[coeffs]

    def evaluator(x: np.ndarray) -> np.ndarray:
        out = np.zeros(len(x), dtype=np.int64)
        logx = log[x]
        zero = x == 0
        for start in range(0, len(x), GRID_CHUNK):
            lx = logx[start : start + GRID_CHUNK]
            zx = zero[start : start + GRID_CHUNK]
            total = (logc[None, :] + lx @ weights.T) % order
            terms = exp[total]
            # a monomial vanishes when a variable with positive exponent is zero
            dead = (zx.astype(np.int64) @ (weights > 0).T.astype(np.int64)) > 0
            terms[dead] = 0
            out[start : start + GRID_CHUNK] = np.bitwise_xor.reduce(terms, axis=1)
        return out

    return TwistedPolynomial(fld, k, d, evaluator, f"random(k={k},d={d})")


class ZeroStatus(StrEnum):
    CERTIFIED = "certified"
    UNCERTIFIED = "uncertified"
    IDENTICALLY_ZERO = "identically-zero"


class ZeroMode(StrEnum):
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class ZeroProbability:
    q: int
    k: int
    d: int
    mode: ZeroMode
    points: int
    zeros: int
    status: ZeroStatus
    explicit_bound: float

    @property
    def fraction(self) -> float:
        return self.zeros / self.points if self.points else 0.0

    @property
    def o_form(self) -> float:
        """k d q^(-1/2), reported only."""
        return self.k * self.d / math.sqrt(self.q)

    @property
    def violated(self) -> bool:
        return self.status is ZeroStatus.CERTIFIED and self.fraction > self.explicit_bound

    @property
    def passed(self) -> bool:
        return not self.violated


def _grid_chunks(q: int, k: int) -> Iterator[np.ndarray]:
    total = q**k
    for start in range(0, total, GRID_CHUNK):
        idx = np.arange(start, min(total, start + GRID_CHUNK), dtype=np.int64)
        cols = []
        for _ in range(k):
            idx, digit = np.divmod(idx, q)
            cols.append(digit)
        yield np.stack(cols, axis=1)


def zero_probability(
    P: TwistedPolynomial,
    mode: ZeroMode | str = ZeroMode.EXACT,
    budget: int = 100_000,
    rng: np.random.Generator | None = None,
) -> ZeroProbability:
    """Fraction of F_q^k where P vanishes, against k d (theta + 1)/q.

    A point with P != 0 certifies that P is not the zero function; without
    one the result is ``UNCERTIFIED`` (Monte Carlo) or ``IDENTICALLY_ZERO``
    (exact).
    """
    mode = ZeroMode(mode)
    fld = P.field
    bound = explicit_twist_bound(P.k, P.degree, fld)
    zeros = points = 0
    certified = P.certified
    if mode is ZeroMode.EXACT:
        if fld.q**P.k > EXACT_GRID_LIMIT:
            msg = f"exact zero count over q^k = {fld.q}^{P.k} points exceeds {EXACT_GRID_LIMIT}"
            raise CapacityError(msg, limit=EXACT_GRID_LIMIT, hint="use monte_carlo mode")
        for pts in _grid_chunks(fld.q, P.k):
            vals = P(pts)
            zeros += int(np.count_nonzero(vals == 0))
            points += len(pts)
        certified = certified or zeros < points
        status = ZeroStatus.CERTIFIED if certified else ZeroStatus.IDENTICALLY_ZERO
    else:
        if rng is None:
            msg = "monte_carlo zero probability needs an rng"
            raise ValueError(msg)
        for start in range(0, budget, GRID_CHUNK):
            size = min(GRID_CHUNK, budget - start)
            vals = P(rng.integers(0, fld.q, size=(size, P.k)))
            zeros += int(np.count_nonzero(vals == 0))
            points += size
        certified = certified or zeros < points
        status = ZeroStatus.CERTIFIED if certified else ZeroStatus.UNCERTIFIED
    return ZeroProbability(fld.q, P.k, P.degree, mode, points, zeros, status, bound)


def find_witness(P: TwistedPolynomial, rng: np.random.Generator, attempts: int = 4096) -> tuple[int, ...] | None:
    """A point where P is nonzero, or None."""
    pts = rng.integers(0, P.field.q, size=(attempts, P.k))
    nz = np.flatnonzero(P(pts) != 0)
    return None if len(nz) == 0 else tuple(int(v) for v in pts[nz[0]])


# ---------------------------------------------------------------------------
# Word polynomials
# ---------------------------------------------------------------------------


def cleared_big_cell_batch(fld: Field, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(c gamma) U(alpha, beta) D(gamma) T U(alpha2, beta2) for rows (alpha, beta, gamma, alpha2, beta2).

    The factor s = gamma^(theta+1) clears every inverse of gamma, leaving
    entries polynomial in the parameters and their theta-powers.  Returns the
    matrices and s.
    """
    al, be, g, al2, be2 = (params[:, i] for i in range(BIG_CELL_VARIABLES))
    th = fld.theta_array
    mul = fld.mul_array
    c = th(g)
    s = mul(c, g)
    diag = np.stack([mul(s, s), mul(s, g), c, np.ones_like(g)], axis=1)
    u = u_batch(fld, th(al), th(be), al, be)
    ud = np.zeros_like(u)
    for j in range(4):
        ud[:, :, j] = mul(u[:, :, j], diag[:, j, None])
    u2 = u_batch(fld, th(al2), th(be2), al2, be2)
    return matmul_batch(fld, ud[:, :, ::-1], u2), s


def _letter_counts(w: Word) -> tuple[int, int]:
    na = sum(1 for x in w.letters if x in (A, A ^ 1))
    nb = sum(1 for x in w.letters if x in (B, B ^ 1))
    return na, nb


def _cleared_word(fld: Field, w: Word, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(W~, s) with W~ = s w(a, b) and s = s_a^(n_a) s_b^(n_b)."""
    a, sa = cleared_big_cell_batch(fld, points[:, :BIG_CELL_VARIABLES])
    b, sb = cleared_big_cell_batch(fld, points[:, BIG_CELL_VARIABLES:])
    # the symplectic inverse is linear in the entries, so it keeps the same scale
    W = evaluate_batch(fld, w, a, b)
    na, nb = _letter_counts(w)
    s = fld.mul_array(fld.pow_array(sa, na), fld.pow_array(sb, nb))
    return W, s


def t_pair_point() -> tuple[int, ...]:
    """Big-cell parameters of a = b = T."""
    return (0, 0, 1, 0, 0) * 2


def word_coefficient_poly(w: Word, i: int, x_target: int, fld: Field) -> TwistedPolynomial:
    """P(a, b) = c_i(W~) + x_target s^i, vanishing exactly when c_i(w(a, b)) = x_target.

    Variables are the big-cell parameters of a then b.  Degree bound
    2 i max(n_a, n_b).  When x_target != 0 the point a = b = T (where every
    c_i is 0 and s = 1) certifies P != 0.
    """
    if w.is_identity():
        msg = "word polynomials need a nontrivial word"
        raise ValueError(msg)
    if i not in (1, 2, 3):
        msg = f"coefficient index must be 1, 2 or 3, got {i}"
        raise ValueError(msg)
    na, nb = _letter_counts(w)

    def evaluator(points: np.ndarray) -> np.ndarray:
        W, s = _cleared_word(fld, w, points)
        c = charpoly_batch(fld, W)[i - 1]
        return c ^ fld.mul_array(np.full(len(points), x_target, dtype=np.int64), fld.pow_array(s, i))

    P = TwistedPolynomial(
        fld, 2 * BIG_CELL_VARIABLES, 2 * i * max(na, nb), evaluator, f"c{i}({w.to_text()})+{x_target}"
    )
    return P.with_witness(t_pair_point()) if x_target != 0 else P


def word_relation_polys(w: Word, fld: Field, rng: np.random.Generator, attempts: int = 256) -> list[TwistedPolynomial]:
    """The sixteen entries of W~ - s I; all vanish exactly when w(a, b) = 1.

    Each is certified nonzero by a random witness when one is found.
    """
    if w.is_identity():
        msg = "word polynomials need a nontrivial word"
        raise ValueError(msg)
    na, nb = _letter_counts(w)
    polys = []
    for r, c in itertools.product(range(4), range(4)):

        def evaluator(points: np.ndarray, r: int = r, c: int = c) -> np.ndarray:
            W, s = _cleared_word(fld, w, points)
            entry = W[:, r, c]
            return entry ^ s if r == c else entry

        P = TwistedPolynomial(fld, 2 * BIG_CELL_VARIABLES, 2 * max(na, nb), evaluator, f"{w.to_text()}[{r},{c}]")
        witness = find_witness(P, rng, attempts)
        polys.append(P if witness is None else P.with_witness(witness))
    return polys


# ---------------------------------------------------------------------------
# Word laws
# ---------------------------------------------------------------------------


class WitnessStatus(StrEnum):
    FOUND = "found"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class LawWitness:
    word: str
    status: WitnessStatus
    attempts_used: int
    a: tuple[int, ...] | None = None
    b: tuple[int, ...] | None = None


def word_law_witness(w: Word, fld: Field, attempts: int, rng: np.random.Generator) -> LawWitness:
    """First of ``attempts`` random pairs in Sz(q) minus B with w(a, b) != 1."""
    if w.is_identity():
        msg = "the empty word is a law in every group"
        raise ValueError(msg)
    pa = random_params(fld, rng, attempts, big_cell_only=True)
    pb = random_params(fld, rng, attempts, big_cell_only=True)
    values = evaluate_batch(fld, w, assemble_batch(pa), assemble_batch(pb))
    hits = np.flatnonzero(~is_identity_batch(values))
    if len(hits) == 0:
        return LawWitness(w.to_text(), WitnessStatus.EXHAUSTED, attempts)
    k = int(hits[0])
    return LawWitness(w.to_text(), WitnessStatus.FOUND, k + 1, pa.params(k).values, pb.params(k).values)


def symplectic_scale_check(fld: Field, params: np.ndarray) -> bool:
    """T X~^t T equals s times the true inverse for cleared big-cell matrices."""
    X, s = cleared_big_cell_batch(fld, params)
    prod = matmul_batch(fld, X, symplectic_inverse_batch(X))
    s2 = fld.mul_array(s, s)
    eye = np.eye(4, dtype=np.int64)
    return bool(np.all(prod == fld.mul_array(eye[None], s2[:, None, None])))
