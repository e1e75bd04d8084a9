"""Arithmetic in GF(2^m).

Elements are bit patterns of residue polynomials modulo a fixed irreducible
polynomial over GF(2).  For odd ``m = 2n + 1`` the field carries the map
``x -> x^theta`` with ``theta = 2^(n+1)``, which satisfies
``theta(theta(x)) == x * x``.

Two layers are exposed:

* ``Field`` methods (``add``, ``mul``, ``inv``, ``pow``, ``theta``) work on raw
  ``int`` bit patterns and are what the group and polynomial code calls in
  hot loops; ``*_array`` variants do the same on numpy arrays.
* ``FieldElement`` wraps a bit pattern together with its field and supports
  the usual operators; the module-level ``add``/``mul``/``inv``/``power``/
  ``theta`` functions take ``FieldElement`` operands and check that both come
  from the same field.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from functools import cache, cached_property

import numpy as np
import sympy

from suzuki_lab.errors import (
    CapacityError,
    FieldError,
    FieldMismatchError,
    InternalConsistencyError,
)


logger = logging.getLogger(__name__)

MAX_DEGREE = 31
# log/antilog tables are built up to this degree; above it arithmetic falls back
# to carry-less multiplication and the vectorized API is unavailable.
TABLE_MAX_DEGREE = 16


# ---------------------------------------------------------------------------
# GF(2)[X] helpers (polynomials packed into ints)
# ---------------------------------------------------------------------------


def _clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[X] polynomials."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def _gf2_mod(a: int, modulus: int) -> int:
    deg = modulus.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= modulus << (a.bit_length() - 1 - deg)
    return a


def _gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _gf2_mod(a, b)
    return a


def is_irreducible(poly: int) -> bool:
    """Rabin-style test: gcd(X^(2^i) - X, f) == 1 for 1 <= i <= deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    x_power = 0b10
    for _ in range(deg // 2):
        x_power = _gf2_mod(_clmul(x_power, x_power), poly)
        if _gf2_gcd(poly, x_power ^ 0b10) != 1:
            return False
    return True


def least_irreducible(m: int) -> int:
    """Lexicographically least irreducible degree-m polynomial with constant term 1."""
    for candidate in range((1 << m) | 1, 1 << (m + 1), 2):
        if is_irreducible(candidate):
            return candidate
    msg = f"no irreducible polynomial of degree {m} found"  # pragma: no cover
    raise FieldError(msg)  # pragma: no cover


# ---------------------------------------------------------------------------
# Field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Field:
    """GF(2^m) with a fixed irreducible modulus.

    Use ``field_new`` (odd m, cached) or ``Field.binary`` rather than calling
    the constructor directly; the constructor does verify irreducibility.
    """

    m: int
    modulus: int
    _exp: list[int] = field(default_factory=list, compare=False, repr=False)
    _log: list[int] = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.m <= MAX_DEGREE:
            msg = f"field degree m={self.m} outside supported range 1..{MAX_DEGREE}"
            raise FieldError(msg)
        if self.modulus.bit_length() - 1 != self.m or not is_irreducible(self.modulus):
            msg = f"modulus {self.modulus:#b} is not an irreducible polynomial of degree {self.m}"
            raise FieldError(msg)
        if self.m <= TABLE_MAX_DEGREE:
            self._build_tables()

    @classmethod
    def binary(cls, m: int, *, require_odd: bool = True) -> Field:
        """Build GF(2^m) with the canonical modulus.

        ``require_odd=False`` admits even m; such fields have no theta map and
        are only meant for the SL2 comparison track.
        """
        if require_odd and m % 2 == 0:
            msg = f"m={m} is even; Suzuki fields need odd m so that theta^2 = 2q"
            raise FieldError(msg)
        if not 1 <= m <= MAX_DEGREE:
            msg = f"field degree m={m} outside supported range 1..{MAX_DEGREE}"
            raise FieldError(msg)
        return cls(m=m, modulus=least_irreducible(m))

    # -- derived constants ---------------------------------------------------

    @property
    def q(self) -> int:
        return 1 << self.m

    @property
    def is_odd(self) -> bool:
        return self.m % 2 == 1

    @property
    def n(self) -> int:
        """The n in m = 2n + 1."""
        self._require_theta()
        return (self.m - 1) // 2

    @property
    def theta_exponent(self) -> int:
        """theta = 2^(n+1)."""
        return 1 << (self.n + 1)

    @property
    def has_tables(self) -> bool:
        return bool(self._exp)

    @cached_property
    def generator(self) -> int:
        """Least generator of the multiplicative group."""
        order = self.q - 1
        if order == 1:
            return 1
        cofactors = [order // p for p in sympy.primefactors(order)]
        for g in range(2, self.q):
            if all(self._pow_slow(g, c) != 1 for c in cofactors):
                return g
        msg = f"GF(2^{self.m}) has no primitive element"  # pragma: no cover
        raise FieldError(msg)  # pragma: no cover

    def __str__(self) -> str:
        return f"GF(2^{self.m})"

    # -- construction helpers ------------------------------------------------

    def _build_tables(self) -> None:
        order = self.q - 1
        g = self.generator
        exp = [0] * (2 * order)
        log = [0] * self.q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._mul_slow(x, g)
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        # frozen dataclass: fill the preallocated lists in place
        self._exp.extend(exp)
        self._log.extend(log)
        logger.debug("built tables for GF(2^%d), modulus=%#x, generator=%d", self.m, self.modulus, g)

    def _mul_slow(self, a: int, b: int) -> int:
        return _gf2_mod(_clmul(a, b), self.modulus)

    def _pow_slow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_slow(result, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return result

    def _require_theta(self) -> None:
        if not self.is_odd:
            msg = f"theta is only defined for odd m; {self} has m={self.m}"
            raise FieldError(msg)

    # -- scalar arithmetic on bit patterns ---------------------------------

    def element(self, bits: int) -> FieldElement:
        if not 0 <= bits < self.q:
            msg = f"bit pattern {bits:#x} is not a canonical element of {self}"
            raise FieldError(msg)
        return FieldElement(self, bits)

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    @property
    def x(self) -> FieldElement:
        """The class of X."""
        return FieldElement(self, _gf2_mod(0b10, self.modulus))

    def elements(self) -> Iterator[FieldElement]:
        for bits in range(self.q):
            yield FieldElement(self, bits)

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_slow(a, b)

    def square(self, a: int) -> int:
        return self.mul(a, a)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            msg = f"negative exponent {e}; use inv first"
            raise FieldError(msg)
        if a == 0:
            return 1 if e == 0 else 0
        if self._exp:
            return self._exp[(self._log[a] * e) % (self.q - 1)]
        return self._pow_slow(a, e)

    def inv(self, a: int) -> int:
        if a == 0:
            msg = f"division by zero in {self}"
            raise FieldError(msg)
        return self.pow(a, self.q - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def theta(self, a: int) -> int:
        """x^(2^(n+1)) by n+1 successive squarings."""
        self._require_theta()
        for _ in range(self.n + 1):
            a = self.mul(a, a)
        return a

    # -- vectorized arithmetic ------------------------------------------------

    def _require_tables(self) -> None:
        if not self._exp:
            msg = f"vectorized arithmetic needs log tables; {self} exceeds m={TABLE_MAX_DEGREE}"
            raise CapacityError(
                msg, limit=TABLE_MAX_DEGREE, hint="use a field with m <= 16 for batch work"
            )

    @cached_property
    def _exp_np(self) -> np.ndarray:
        self._require_tables()
        return np.asarray(self._exp, dtype=np.int64)

    @cached_property
    def _log_np(self) -> np.ndarray:
        self._require_tables()
        return np.asarray(self._log, dtype=np.int64)

    def mul_array(self, a: np.ndarray, b: np.ndarray | int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        prod = self._exp_np[self._log_np[a] + self._log_np[b]]
        return np.where((a == 0) | (b == 0), 0, prod)

    def pow_array(self, a: np.ndarray, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if e == 0:
            return np.ones_like(a)
        out = self._exp_np[(self._log_np[a] * (e % (self.q - 1))) % (self.q - 1)]
        return np.where(a == 0, 0, out)

    def inv_array(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            msg = f"division by zero in {self}"
            raise FieldError(msg)
        return self._exp_np[(self.q - 1 - self._log_np[a]) % (self.q - 1)]

    def theta_array(self, a: np.ndarray) -> np.ndarray:
        self._require_theta()
        return self.pow_array(a, self.theta_exponent)

    def random_bits(self, rng: np.random.Generator, size, *, nonzero: bool = False) -> np.ndarray:
        return rng.integers(1 if nonzero else 0, self.q, size=size, dtype=np.int64)


@cache
def field_new(m: int) -> Field:
    """GF(2^m) for odd m, 1 <= m <= 31, with the least irreducible modulus.

    Cached, so every caller sees the same ``Field`` instance for a given m.
    """
    if m % 2 == 0:
        msg = f"m={m} is even; only odd extension degrees are supported"
        raise FieldError(msg)
    return Field.binary(m)


@cache
def binary_field(m: int) -> Field:
    """GF(2^m) for any m (even m allowed; no theta map)."""
    return Field.binary(m, require_odd=False)


# ---------------------------------------------------------------------------
# FieldElement
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FieldElement:
    """An element of GF(2^m) stored as the bit vector of its residue polynomial."""

    field: Field
    bits: int

    def _check(self, other: FieldElement) -> None:
        if self.field is not other.field and self.field != other.field:
            msg = f"cannot combine elements of {self.field} and {other.field}"
            raise FieldMismatchError(msg)

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field, self.bits ^ other.bits)

    __sub__ = __add__

    def __neg__(self) -> FieldElement:
        return self

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.bits, other.bits))

    def __truediv__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.field, self.field.div(self.bits, other.bits))

    def __pow__(self, e: int) -> FieldElement:
        if e < 0:
            return FieldElement(self.field, self.field.pow(self.field.inv(self.bits), -e))
        return FieldElement(self.field, self.field.pow(self.bits, e))

    def __bool__(self) -> bool:
        return self.bits != 0

    def inverse(self) -> FieldElement:
        return FieldElement(self.field, self.field.inv(self.bits))

    def theta(self) -> FieldElement:
        return FieldElement(self.field, self.field.theta(self.bits))

    def __repr__(self) -> str:
        return f"FieldElement({self.bits:0{self.field.m}b} in {self.field})"


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def inv(x: FieldElement) -> FieldElement:
    return x.inverse()


def power(x: FieldElement, e: int) -> FieldElement:
    if e < 0:
        msg = f"negative exponent {e}"
        raise FieldError(msg)
    return x**e


def theta(x: FieldElement) -> FieldElement:
    return x.theta()


# ---------------------------------------------------------------------------
# Univariate polynomials over GF(2^m)
# ---------------------------------------------------------------------------


def _strip(coeffs: Sequence[int]) -> tuple[int, ...]:
    end = len(coeffs)
    while end and coeffs[end - 1] == 0:
        end -= 1
    return tuple(coeffs[:end])


@dataclass(frozen=True)
class UniPoly:
    """Polynomial over a Field, coefficients low degree first, canonical form."""

    field: Field
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _strip(self.coeffs))

    @classmethod
    def from_elements(cls, coefficients: Sequence[FieldElement]) -> UniPoly:
        if not coefficients:
            msg = "from_elements needs at least one coefficient to know the field"
            raise FieldError(msg)
        fld = coefficients[0].field
        return cls(fld, tuple(c.bits for c in coefficients))

    @property
    def coefficients(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.field, c) for c in self.coeffs)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = self.field.mul(acc, x) ^ c
        return acc

    def evaluate_all(self) -> np.ndarray:
        """Values at every element of the field (needs tables)."""
        xs = np.arange(self.field.q, dtype=np.int64)
        acc = np.zeros_like(xs)
        for c in reversed(self.coeffs):
            acc = self.field.mul_array(acc, xs) ^ c
        return acc


def _poly_mod(a: list[int], b: tuple[int, ...], fld: Field) -> list[int]:
    """Remainder of a by b (b nonzero), coefficients low degree first."""
    a = list(a)
    db = len(b) - 1
    lead_inv = fld.inv(b[-1])
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c == 0:
            continue
        factor = fld.mul(c, lead_inv)
        shift = i - db
        for j, bj in enumerate(b):
            if bj:
                a[shift + j] ^= fld.mul(factor, bj)
    return list(_strip(a[:db])) if db > 0 else []


def _poly_gcd(a: tuple[int, ...], b: tuple[int, ...], fld: Field) -> tuple[int, ...]:
    a_list, b_list = list(a), list(b)
    while b_list:
        a_list, b_list = b_list, _poly_mod(a_list, tuple(b_list), fld)
    return tuple(a_list)


def _square_mod(r: list[int], f: tuple[int, ...], fld: Field) -> list[int]:
    # char 2: (sum c_i X^i)^2 = sum c_i^2 X^(2i)
    sq = [0] * (2 * len(r))
    for i, c in enumerate(r):
        if c:
            sq[2 * i] = fld.mul(c, c)
    return _poly_mod(sq, f, fld)


def count_roots(f: UniPoly) -> int:
    """Number of distinct roots of f in the field: deg gcd(f, X^q - X)."""
    if f.is_zero():
        msg = "the zero polynomial vanishes everywhere; root count is undefined"
        raise FieldError(msg)
    if f.degree == 0:
        return 0
    fld = f.field
    r = _poly_mod([0, 1], f.coeffs, fld)  # X mod f
    for _ in range(fld.m):
        r = _square_mod(r, f.coeffs, fld)
    # X^q - X mod f
    diff = list(r) + [0] * max(0, 2 - len(r))
    diff[1] ^= 1
    diff_t = _strip(diff)
    if not diff_t:
        return f.degree
    return len(_poly_gcd(f.coeffs, diff_t, fld)) - 1


def count_roots_exhaustive(f: UniPoly) -> int:
    """Brute-force oracle for ``count_roots``."""
    if f.is_zero():
        msg = "the zero polynomial vanishes everywhere; root count is undefined"
        raise FieldError(msg)
    if f.field.has_tables:
        return int(np.count_nonzero(f.evaluate_all() == 0))
    return sum(1 for x in range(f.field.q) if f(x) == 0)


# ---------------------------------------------------------------------------
# Subfields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubfieldEmbedding:
    """Field homomorphism GF(2^m0) -> GF(2^m) sending X to a fixed root of sub's modulus."""

    sub: Field
    big: Field
    root: int
    table: tuple[int, ...]

    def __call__(self, x: FieldElement) -> FieldElement:
        if x.field != self.sub:
            msg = f"element of {x.field} passed to embedding of {self.sub}"
            raise FieldMismatchError(msg)
        return FieldElement(self.big, self.table[x.bits])

    def embed_bits(self, bits: int) -> int:
        return self.table[bits]

    @cached_property
    def image(self) -> frozenset[int]:
        return frozenset(self.table)

    @cached_property
    def preimage(self) -> dict[int, int]:
        return {b: s for s, b in enumerate(self.table)}

    def contains(self, bits: int) -> bool:
        return bits in self.image


def subfield_embedding(sub: Field, big: Field) -> SubfieldEmbedding:
    if big.m % sub.m != 0:
        msg = f"{sub} is not a subfield of {big}: {sub.m} does not divide {big.m}"
        raise FieldError(msg)
    sub_modulus = [(sub.modulus >> i) & 1 for i in range(sub.m + 1)]
    # Roots of sub's modulus lie in the fixed field of x -> x^(2^m0).
    root = next(
        (
            x
            for x in _fixed_field(big, sub.m)
            if UniPoly(big, tuple(sub_modulus))(x) == 0
        ),
        None,
    )
    if root is None:  # pragma: no cover
        msg = f"modulus of {sub} has no root in {big}"
        raise InternalConsistencyError(msg)
    powers = [1]
    for _ in range(sub.m - 1):
        powers.append(big.mul(powers[-1], root))
    table = []
    for bits in range(sub.q):
        acc = 0
        for i in range(sub.m):
            if (bits >> i) & 1:
                acc ^= powers[i]
        table.append(acc)
    return SubfieldEmbedding(sub=sub, big=big, root=root, table=tuple(table))


def _fixed_field(big: Field, d: int) -> list[int]:
    """Sorted bit patterns of {x : x^(2^d) = x}, the copy of GF(2^d) inside big."""
    if big.m % d != 0:
        msg = f"{d} does not divide {big.m}"
        raise FieldError(msg)
    order = (1 << d) - 1
    beta = big.pow(big.generator, (big.q - 1) // order)
    values = {0}
    x = 1
    for _ in range(order):
        values.add(x)
        x = big.mul(x, beta)
    return sorted(values)


def subfield_union(fld: Field) -> frozenset[int]:
    """Union of all proper subfields of fld, as bit patterns."""
    union: set[int] = set()
    for d in sympy.divisors(fld.m):
        if d < fld.m:
            union.update(_fixed_field(fld, d))
    return frozenset(union)


@dataclass(frozen=True)
class SubfieldCensus:
    m: int
    proper_divisors: tuple[int, ...]
    union_size: int
    bound: float  # 2 * q^(1/3)

    @property
    def within_bound(self) -> bool:
        return self.union_size <= self.bound


def subfield_census(m: int) -> SubfieldCensus:
    """Size of the union of proper subfields of GF(2^m) by counting exact degrees."""
    exact: dict[int, int] = {}
    for d in sympy.divisors(m):
        exact[d] = (1 << d) - sum(exact[e] for e in sympy.divisors(d) if e < d)
    proper = tuple(d for d in sympy.divisors(m) if d < m)
    union = sum(exact[d] for d in proper)
    return SubfieldCensus(
        m=m, proper_divisors=proper, union_size=union, bound=2 * (1 << m) ** (1 / 3)
    )


# ---------------------------------------------------------------------------
# Exhaustive field laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldLaws:
    """Failure counts of the exhaustive identity checks over one field."""

    m: int
    q: int
    theta_failures: int  # (x^theta)^theta != x^2
    order_failures: int  # x^(q-1) != 1 for x != 0
    table_failures: int  # table product != carry-less product

    @property
    def failures(self) -> int:
        return self.theta_failures + self.order_failures + self.table_failures

    @property
    def passed(self) -> bool:
        return self.failures == 0


def check_field_laws(fld: Field, *, table_samples: int = 4096) -> FieldLaws:
    """Every x: theta twice equals squaring and x^(q-1) = 1.

    Powers go through carry-less square-and-multiply so they do not share
    the log tables with ``theta``.  Table products are compared with
    carry-less products on a fixed grid of ``table_samples`` pairs.
    """
    theta_failures = sum(1 for x in range(fld.q) if fld.theta(fld.theta(x)) != fld.mul(x, x))
    order_failures = sum(1 for x in range(1, fld.q) if fld._pow_slow(x, fld.q - 1) != 1)
    table_failures = 0
    if fld.has_tables:
        step = max(1, fld.q * fld.q // table_samples)
        for k in range(0, fld.q * fld.q, step):
            a, b = divmod(k, fld.q)
            if fld.mul(a, b) != fld._mul_slow(a, b):
                table_failures += 1
    return FieldLaws(fld.m, fld.q, theta_failures, order_failures, table_failures)
