"""The Suzuki group Sz(q) as explicit 4x4 matrices over GF(q), q = 2^(2n+1).

Every element has a unique Bruhat parametrisation, either

* ``Borel(alpha, beta, gamma)``: the matrix U(alpha, beta) D(gamma), or
* ``BigCell(alpha, beta, gamma, alpha2, beta2)``: U(alpha, beta) D(gamma) T U(alpha2, beta2),

where U(alpha, beta) = u(alpha^theta, beta^theta, alpha, beta) and
D(gamma) = d(gamma^theta, gamma).  ``SuzukiElement`` keeps the parameters as
its identity (equality and hashing) and caches the matrix.

Hot loops (enumeration, generator tables, batched walks) use the numpy batch
helpers at the bottom of the module; they need the field's log tables.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum, StrEnum
from functools import cached_property

import numpy as np
import sympy
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from suzuki_lab.errors import (
    CapacityError,
    FieldError,
    FieldMismatchError,
    InternalConsistencyError,
)
from suzuki_lab.field import Field, FieldElement, SubfieldEmbedding, subfield_embedding


logger = logging.getLogger(__name__)

FULL_INDEX_MAX_Q = 8
PARAMS_INDEX_MAX_Q = 32


# ---------------------------------------------------------------------------
# Orders
# ---------------------------------------------------------------------------


def _check_q(q: int) -> int:
    m = q.bit_length() - 1
    if q < 2 or q & (q - 1) or m % 2 == 0:
        msg = f"q={q} is not 2^m with m odd"
        raise FieldError(msg)
    return m


def group_order(q: int) -> int:
    """|Sz(q)| = q^2 (q^2 + 1)(q - 1)."""
    _check_q(q)
    return q * q * (q * q + 1) * (q - 1)


def borel_order(q: int) -> int:
    """|B| = q^2 (q - 1)."""
    _check_q(q)
    return q * q * (q - 1)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def _matmul(fld: Field, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
    mul = fld.mul
    out: list[int] = []
    for i in range(0, 16, 4):
        r0, r1, r2, r3 = x[i], x[i + 1], x[i + 2], x[i + 3]
        out.extend(
            mul(r0, y[j]) ^ mul(r1, y[4 + j]) ^ mul(r2, y[8 + j]) ^ mul(r3, y[12 + j])
            for j in range(4)
        )
    return tuple(out)


_IDENTITY = (1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1)
_T = (0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 0)


@dataclass(frozen=True, slots=True)
class Matrix4:
    """4x4 matrix over a Field; ``entries`` are bit patterns in row-major order."""

    field: Field
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != 16:
            msg = f"Matrix4 needs 16 entries, got {len(self.entries)}"
            raise ValueError(msg)

    @classmethod
    def identity(cls, fld: Field) -> Matrix4:
        return cls(fld, _IDENTITY)

    def __getitem__(self, ij: tuple[int, int]) -> FieldElement:
        i, j = ij
        return FieldElement(self.field, self.entries[4 * i + j])

    def bits(self, i: int, j: int) -> int:
        return self.entries[4 * i + j]

    def __matmul__(self, other: Matrix4) -> Matrix4:
        if self.field != other.field:
            msg = f"cannot multiply matrices over {self.field} and {other.field}"
            raise FieldMismatchError(msg)
        return Matrix4(self.field, _matmul(self.field, self.entries, other.entries))

    def transpose(self) -> Matrix4:
        e = self.entries
        return Matrix4(self.field, tuple(e[4 * j + i] for i in range(4) for j in range(4)))

    def symplectic_inverse(self) -> Matrix4:
        """T M^t T, the inverse of any M with M^t T M = T."""
        e = self.entries
        return Matrix4(
            self.field, tuple(e[4 * (3 - j) + (3 - i)] for i in range(4) for j in range(4))
        )

    def is_identity(self) -> bool:
        return self.entries == _IDENTITY

    def is_lower_triangular(self) -> bool:
        e = self.entries
        return not (e[1] or e[2] or e[3] or e[6] or e[7] or e[11])

    def det(self) -> int:
        # characteristic 2: the determinant equals the permanent
        return _principal_minor_sum(self.field.mul, self.entries, (0, 1, 2, 3))

    def rows(self) -> list[list[FieldElement]]:
        return [[self[i, j] for j in range(4)] for i in range(4)]


def u_matrix(a: FieldElement, b: FieldElement, alpha: FieldElement, beta: FieldElement) -> Matrix4:
    fld = a.field
    for x in (b, alpha, beta):
        if x.field != fld:
            msg = f"u_matrix arguments mix {fld} and {x.field}"
            raise FieldMismatchError(msg)
    return Matrix4(fld, _u_entries(fld, a.bits, b.bits, alpha.bits, beta.bits))


def _u_entries(fld: Field, a: int, b: int, al: int, be: int) -> tuple[int, ...]:
    mul = fld.mul
    al_a = mul(al, a)
    return (
        1, 0, 0, 0,
        al, 1, 0, 0,
        al_a ^ be, a, 1, 0,
        mul(al, al_a) ^ mul(al, be) ^ b, be, al, 1,
    )  # fmt: skip


def d_matrix(c: FieldElement, gamma: FieldElement) -> Matrix4:
    if not c or not gamma:
        msg = "d(c, gamma) needs c != 0 and gamma != 0"
        raise FieldError(msg)
    if c.field != gamma.field:
        msg = f"d_matrix arguments mix {c.field} and {gamma.field}"
        raise FieldMismatchError(msg)
    return Matrix4(c.field, _d_entries(c.field, c.bits, gamma.bits))


def _d_entries(fld: Field, c: int, g: int) -> tuple[int, ...]:
    cg = fld.mul(c, g)
    return (
        cg, 0, 0, 0,
        0, g, 0, 0,
        0, 0, fld.inv(g), 0,
        0, 0, 0, fld.inv(cg),
    )  # fmt: skip


def t_matrix(fld: Field) -> Matrix4:
    return Matrix4(fld, _T)


def big_U(alpha: FieldElement, beta: FieldElement) -> Matrix4:
    """U(alpha, beta) = u(alpha^theta, beta^theta, alpha, beta)."""
    return u_matrix(alpha.theta(), beta.theta(), alpha, beta)


def big_D(gamma: FieldElement) -> Matrix4:
    """D(gamma) = d(gamma^theta, gamma)."""
    if not gamma:
        msg = "D(gamma) needs gamma != 0"
        raise FieldError(msg)
    return d_matrix(gamma.theta(), gamma)


def is_symplectic(M: Matrix4) -> bool:
    """M^t T M == T."""
    T = t_matrix(M.field)
    return (M.transpose() @ T @ M).entries == _T


# ---------------------------------------------------------------------------
# Bruhat parameters
# ---------------------------------------------------------------------------


class CellKind(StrEnum):
    BOREL = "borel"
    BIG_CELL = "big-cell"


def _check_bits(fld: Field, *values: int) -> None:
    for v in values:
        if not 0 <= v < fld.q:
            msg = f"parameter {v:#x} is not an element of {fld}"
            raise FieldError(msg)


@dataclass(frozen=True, slots=True)
class Borel:
    """Parameters of U(alpha, beta) D(gamma)."""

    field: Field
    alpha: int
    beta: int
    gamma: int

    def __post_init__(self) -> None:
        _check_bits(self.field, self.alpha, self.beta, self.gamma)
        if self.gamma == 0:
            msg = "gamma must be nonzero"
            raise FieldError(msg)

    kind = CellKind.BOREL

    @property
    def values(self) -> tuple[int, ...]:
        return (self.alpha, self.beta, self.gamma)

    @property
    def key(self) -> int:
        m = self.field.m
        return (self.alpha << 4 * m) | (self.beta << 3 * m) | (self.gamma << 2 * m)

    @property
    def rank(self) -> int:
        q = self.field.q
        return (self.alpha * q + self.beta) * (q - 1) + self.gamma - 1


@dataclass(frozen=True, slots=True)
class BigCell:
    """Parameters of U(alpha, beta) D(gamma) T U(alpha2, beta2)."""

    field: Field
    alpha: int
    beta: int
    gamma: int
    alpha2: int
    beta2: int

    def __post_init__(self) -> None:
        _check_bits(self.field, self.alpha, self.beta, self.gamma, self.alpha2, self.beta2)
        if self.gamma == 0:
            msg = "gamma must be nonzero"
            raise FieldError(msg)

    kind = CellKind.BIG_CELL

    @property
    def values(self) -> tuple[int, ...]:
        return (self.alpha, self.beta, self.gamma, self.alpha2, self.beta2)

    @property
    def key(self) -> int:
        m = self.field.m
        return (
            (1 << 5 * m)
            | (self.alpha << 4 * m)
            | (self.beta << 3 * m)
            | (self.gamma << 2 * m)
            | (self.alpha2 << m)
            | self.beta2
        )

    @property
    def rank(self) -> int:
        q = self.field.q
        inner = ((self.alpha * q + self.beta) * (q - 1) + self.gamma - 1) * q * q
        return borel_order(q) + inner + self.alpha2 * q + self.beta2


BruhatParams = Borel | BigCell


class NotMember(Enum):
    """Result of ``factorize`` for a matrix outside Sz(q)."""

    NOT_MEMBER = "not-member"


NOT_MEMBER = NotMember.NOT_MEMBER


def params_from_rank(fld: Field, rank: int) -> BruhatParams:
    q = fld.q
    nb = borel_order(q)
    if not 0 <= rank < group_order(q):
        msg = f"rank {rank} outside 0..{group_order(q) - 1}"
        raise IndexError(msg)
    if rank < nb:
        rest, g = divmod(rank, q - 1)
        alpha, beta = divmod(rest, q)
        return Borel(fld, alpha, beta, g + 1)
    rest, beta2 = divmod(rank - nb, q)
    rest, alpha2 = divmod(rest, q)
    rest, g = divmod(rest, q - 1)
    alpha, beta = divmod(rest, q)
    return BigCell(fld, alpha, beta, g + 1, alpha2, beta2)


def _assemble_entries(p: BruhatParams) -> tuple[int, ...]:
    fld = p.field
    th = fld.theta
    g = p.gamma
    u = _u_entries(fld, th(p.alpha), th(p.beta), p.alpha, p.beta)
    d = _d_entries(fld, th(g), g)
    diag = (d[0], d[5], d[10], d[15])
    # U D: scale column j by the j-th diagonal entry
    ud = tuple(fld.mul(u[k], diag[k % 4]) for k in range(16))
    if isinstance(p, Borel):
        return ud
    udt = tuple(ud[4 * i + (3 - j)] for i in range(4) for j in range(4))
    u2 = _u_entries(fld, th(p.alpha2), th(p.beta2), p.alpha2, p.beta2)
    return _matmul(fld, udt, u2)


@dataclass(frozen=True, slots=True)
class SuzukiElement:
    """An element of Sz(q); identity is the canonical Bruhat parametrisation."""

    params: BruhatParams
    matrix: Matrix4 = field(compare=False, repr=False, hash=False)

    @property
    def field(self) -> Field:
        return self.params.field

    def __mul__(self, other: SuzukiElement) -> SuzukiElement:
        return multiply(self, other)

    def inverse(self) -> SuzukiElement:
        return inverse(self)

    def is_identity(self) -> bool:
        return self.matrix.is_identity()

    def is_borel(self) -> bool:
        return isinstance(self.params, Borel)


def assemble(p: BruhatParams) -> SuzukiElement:
    return SuzukiElement(p, Matrix4(p.field, _assemble_entries(p)))


def identity(fld: Field) -> SuzukiElement:
    return assemble(Borel(fld, 0, 0, 1))


def t_element(fld: Field) -> SuzukiElement:
    return assemble(BigCell(fld, 0, 0, 1, 0, 0))


def _borel_params(fld: Field, e: Sequence[int]) -> Borel | None:
    """Read (alpha, beta, gamma) off a lower-triangular U D candidate."""
    d0, d1 = e[0], e[5]
    if d0 == 0 or d1 == 0 or e[10] == 0 or e[15] == 0:
        return None
    alpha = fld.div(e[4], d0)
    beta = fld.div(e[13], d1)
    return Borel(fld, alpha, beta, d1)


def factorize(M: Matrix4) -> BruhatParams | NotMember:
    """Unique Bruhat parameters of M, or NOT_MEMBER if M is not in Sz(q).

    Borel shape is tried first (lower triangular); otherwise U(alpha2, beta2)
    is read off the first row, peeled from the right and the remainder is
    factored as a Borel element times T.  The candidate is reassembled and
    compared with M, which checks the twisted constraints and symplecticity.
    """
    fld = M.field
    e = M.entries
    params: BruhatParams | None
    if M.is_lower_triangular():
        params = _borel_params(fld, e)
    elif e[3] == 0:
        return NOT_MEMBER
    else:
        alpha2 = fld.div(e[2], e[3])
        beta2 = fld.div(e[1], e[3])
        u2 = Matrix4(fld, _u_entries(fld, fld.theta(alpha2), fld.theta(beta2), alpha2, beta2))
        bt = _matmul(fld, e, u2.symplectic_inverse().entries)
        b = tuple(bt[4 * i + (3 - j)] for i in range(4) for j in range(4))
        borel = _borel_params(fld, b) if Matrix4(fld, b).is_lower_triangular() else None
        params = (
            None if borel is None else BigCell(fld, borel.alpha, borel.beta, borel.gamma, alpha2, beta2)
        )
    if params is None or _assemble_entries(params) != e:
        return NOT_MEMBER
    return params


def element_from_matrix(M: Matrix4) -> SuzukiElement:
    params = factorize(M)
    if params is NOT_MEMBER:
        msg = f"matrix {M.entries} does not factorize in Sz({M.field.q})"
        raise InternalConsistencyError(msg)
    return SuzukiElement(params, M)


def multiply(g: SuzukiElement, h: SuzukiElement) -> SuzukiElement:
    return element_from_matrix(g.matrix @ h.matrix)


def inverse(g: SuzukiElement) -> SuzukiElement:
    return element_from_matrix(g.matrix.symplectic_inverse())


def conjugate(g: SuzukiElement, x: SuzukiElement) -> SuzukiElement:
    """x^-1 g x."""
    return element_from_matrix(x.matrix.symplectic_inverse() @ g.matrix @ x.matrix)


def matrix_power(M: Matrix4, e: int) -> Matrix4:
    result = Matrix4.identity(M.field)
    base = M
    while e:
        if e & 1:
            result = result @ base
        base = base @ base
        e >>= 1
    return result


def element_order(g: SuzukiElement) -> int:
    """Order of g, by stripping prime factors from the exponent q^2(q^2+1)(q-1)."""
    order = group_order(g.field.q)
    for p in sympy.factorint(order):
        while order % p == 0 and matrix_power(g.matrix, order // p).is_identity():
            order //= p
    return order


# ---------------------------------------------------------------------------
# Characteristic polynomial
# ---------------------------------------------------------------------------


def _principal_minor_sum(mul: Callable, e: Sequence, subset: Sequence[int]):
    """Sum of all permutation products over ``subset`` (char 2: signs vanish)."""
    total = 0
    for perm in itertools.permutations(subset):
        term = None
        for r, c in zip(subset, perm, strict=True):
            x = e[4 * r + c]
            term = x if term is None else mul(term, x)
        total = total ^ term
    return total


def _charpoly(mul: Callable, e: Sequence) -> tuple:
    c1 = e[0] ^ e[5] ^ e[10] ^ e[15]
    c2 = 0
    for pair in itertools.combinations(range(4), 2):
        c2 = c2 ^ _principal_minor_sum(mul, e, pair)
    c3 = 0
    for triple in itertools.combinations(range(4), 3):
        c3 = c3 ^ _principal_minor_sum(mul, e, triple)
    return c1, c2, c3


def charpoly_coeffs(g: SuzukiElement | Matrix4) -> tuple[FieldElement, FieldElement, FieldElement]:
    """(c1, c2, c3) with det(t + lambda) = lambda^4 + c1 lambda^3 + c2 lambda^2 + c3 lambda + 1."""
    M = g.matrix if isinstance(g, SuzukiElement) else g
    fld = M.field
    c1, c2, c3 = _charpoly(fld.mul, M.entries)
    return FieldElement(fld, c1), FieldElement(fld, c2), FieldElement(fld, c3)


# ---------------------------------------------------------------------------
# Random elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamsBatch:
    """Column arrays of Bruhat parameters; ``big`` marks big-cell rows."""

    field: Field
    big: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    alpha2: np.ndarray
    beta2: np.ndarray

    def __len__(self) -> int:
        return len(self.big)

    def params(self, i: int) -> BruhatParams:
        if self.big[i]:
            return BigCell(
                self.field,
                int(self.alpha[i]),
                int(self.beta[i]),
                int(self.gamma[i]),
                int(self.alpha2[i]),
                int(self.beta2[i]),
            )
        return Borel(self.field, int(self.alpha[i]), int(self.beta[i]), int(self.gamma[i]))

    def elements(self) -> list[SuzukiElement]:
        return [assemble(self.params(i)) for i in range(len(self))]


def random_params(
    fld: Field, rng: np.random.Generator, size: int, *, big_cell_only: bool = False
) -> ParamsBatch:
    """Uniform samples from Sz(q) (or from Sz(q) minus B).

    Big cell and Borel coset are weighted q^2 : 1, their exact size ratio.
    """
    q = fld.q
    if big_cell_only:
        big = np.ones(size, dtype=bool)
    else:
        big = rng.integers(0, q * q + 1, size=size) != 0
    alpha = fld.random_bits(rng, size)
    beta = fld.random_bits(rng, size)
    gamma = fld.random_bits(rng, size, nonzero=True)
    alpha2 = np.where(big, fld.random_bits(rng, size), 0)
    beta2 = np.where(big, fld.random_bits(rng, size), 0)
    return ParamsBatch(fld, big, alpha, beta, gamma, alpha2, beta2)


def random_element(fld: Field, rng: np.random.Generator, *, big_cell_only: bool = False) -> SuzukiElement:
    return random_params(fld, rng, 1, big_cell_only=big_cell_only).elements()[0]


def random_borel_element(fld: Field, rng: np.random.Generator) -> SuzukiElement:
    alpha, beta = (int(v) for v in fld.random_bits(rng, 2))
    gamma = int(fld.random_bits(rng, 1, nonzero=True)[0])
    return assemble(Borel(fld, alpha, beta, gamma))


# ---------------------------------------------------------------------------
# Subgroups
# ---------------------------------------------------------------------------


def borel_elements(fld: Field) -> Iterator[SuzukiElement]:
    for alpha in range(fld.q):
        for beta in range(fld.q):
            for gamma in range(1, fld.q):
                yield assemble(Borel(fld, alpha, beta, gamma))


def cyclic_elements(g: SuzukiElement) -> list[SuzukiElement]:
    """Powers g^0, g^1, ... up to the order of g."""
    out = [identity(g.field)]
    M = g.matrix
    current = M
    while not current.is_identity():
        out.append(element_from_matrix(current))
        current = current @ M
    return out


@dataclass(frozen=True)
class SubfieldSubgroup:
    """The copy of Sz(q0) inside Sz(q): elements whose parameters all lie in GF(q0)."""

    big: Field
    sub: Field
    embedding: SubfieldEmbedding

    @property
    def order(self) -> int:
        return group_order(self.sub.q)

    def contains(self, g: SuzukiElement) -> bool:
        image = self.embedding.image
        return all(v in image for v in g.params.values)

    __contains__ = contains

    def embed(self, p: BruhatParams) -> SuzukiElement:
        """Image of a Sz(q0) element given by its parameters over the subfield."""
        emb = self.embedding.embed_bits
        if isinstance(p, Borel):
            return assemble(Borel(self.big, emb(p.alpha), emb(p.beta), emb(p.gamma)))
        return assemble(
            BigCell(self.big, emb(p.alpha), emb(p.beta), emb(p.gamma), emb(p.alpha2), emb(p.beta2))
        )

    def elements(self) -> Iterator[SuzukiElement]:
        for rank in range(self.order):
            yield self.embed(params_from_rank(self.sub, rank))

    def random_element(self, rng: np.random.Generator) -> SuzukiElement:
        return self.embed(random_params(self.sub, rng, 1).params(0))


def subfield_subgroup(big: Field, sub: Field) -> SubfieldSubgroup:
    if not (big.is_odd and sub.is_odd):
        msg = "subfield subgroups need odd extension degrees on both sides"
        raise FieldError(msg)
    return SubfieldSubgroup(big=big, sub=sub, embedding=subfield_embedding(sub, big))


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


class GenerationStatus(StrEnum):
    GENERATES = "generates"
    PROPER = "proper"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class GenerationResult:
    status: GenerationStatus
    closure_size: int

    def __bool__(self) -> bool:
        if self.status is GenerationStatus.INDETERMINATE:
            msg = "generation is indeterminate (closure cap reached); inspect .status"
            raise InternalConsistencyError(msg)
        return self.status is GenerationStatus.GENERATES


def generates(
    a: SuzukiElement,
    b: SuzukiElement,
    cap: int = 100_000,
    index: GroupIndex | None = None,
) -> GenerationResult:
    """Breadth-first closure of {a, a^-1, b, b^-1}.

    With a full ``GroupIndex`` the closure is a graph search over the
    generator table; otherwise elements are multiplied out until the closure
    stabilises or ``cap`` elements have been seen.
    """
    order = group_order(a.field.q)
    if index is not None and index.has_matrices:
        table = index.generator_table(a, b)
        n = index.size
        graph = csr_matrix(
            (np.ones(table.size, dtype=np.int8), (np.repeat(np.arange(n), 4), table.ravel())),
            shape=(n, n),
        )
        reached = breadth_first_order(
            graph, index.identity_index, directed=True, return_predecessors=False
        )
        size = len(reached)
        status = GenerationStatus.GENERATES if size == order else GenerationStatus.PROPER
        return GenerationResult(status, size)

    gens = [a.matrix, a.matrix.symplectic_inverse(), b.matrix, b.matrix.symplectic_inverse()]
    start = Matrix4.identity(a.field)
    seen = {start.entries}
    frontier = deque([start])
    while frontier:
        x = frontier.popleft()
        for s in gens:
            y = x @ s
            if y.entries not in seen:
                seen.add(y.entries)
                if len(seen) > cap:
                    return GenerationResult(GenerationStatus.INDETERMINATE, len(seen))
                frontier.append(y)
    size = len(seen)
    status = GenerationStatus.GENERATES if size == order else GenerationStatus.PROPER
    return GenerationResult(status, size)


# ---------------------------------------------------------------------------
# Batched matrices (numpy)
# ---------------------------------------------------------------------------


def matmul_batch(fld: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Products over GF(q) of stacks of 4x4 matrices, broadcasting leading axes."""
    log, exp = fld._log_np, fld._exp_np
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    la, lb = log[A], log[B]
    za, zb = A == 0, B == 0
    shape = np.broadcast_shapes(A.shape[:-2], B.shape[:-2]) + (4, 4)
    out = np.zeros(shape, dtype=np.int64)
    for k in range(4):
        prod = exp[la[..., :, k, None] + lb[..., None, k, :]]
        prod[za[..., :, k, None] | zb[..., None, k, :]] = 0
        out ^= prod
    return out


def symplectic_inverse_batch(A: np.ndarray) -> np.ndarray:
    return np.asarray(A)[..., ::-1, ::-1].swapaxes(-1, -2)


def u_batch(fld: Field, a, b, al, be) -> np.ndarray:
    mul = fld.mul_array
    n = len(al)
    out = np.zeros((n, 4, 4), dtype=np.int64)
    al_a = mul(al, a)
    out[:, 0, 0] = out[:, 1, 1] = out[:, 2, 2] = out[:, 3, 3] = 1
    out[:, 1, 0] = al
    out[:, 2, 0] = al_a ^ be
    out[:, 2, 1] = a
    out[:, 3, 0] = mul(al, al_a) ^ mul(al, be) ^ b
    out[:, 3, 1] = be
    out[:, 3, 2] = al
    return out


def assemble_batch(batch: ParamsBatch) -> np.ndarray:
    """N x 4 x 4 matrices of a parameter batch."""
    fld = batch.field
    th = fld.theta_array
    u = u_batch(fld, th(batch.alpha), th(batch.beta), batch.alpha, batch.beta)
    g = np.asarray(batch.gamma, dtype=np.int64)
    cg = fld.mul_array(th(g), g)
    diag = np.stack([cg, g, fld.inv_array(g), fld.inv_array(cg)], axis=1)
    ud = np.zeros_like(u)
    for j in range(4):
        ud[:, :, j] = fld.mul_array(u[:, :, j], diag[:, j, None])
    big = np.asarray(batch.big, dtype=bool)
    if not big.any():
        return ud
    u2 = u_batch(fld, th(batch.alpha2), th(batch.beta2), batch.alpha2, batch.beta2)
    full = matmul_batch(fld, ud[:, :, ::-1], u2)
    return np.where(big[:, None, None], full, ud)


def charpoly_batch(fld: Field, A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=np.int64)
    flat = [A[..., i // 4, i % 4] for i in range(16)]
    return _charpoly(fld.mul_array, flat)


def matrix_keys(fld: Field, A: np.ndarray) -> np.ndarray:
    """Pack each 4x4 matrix into one int64 (needs 16 m <= 63)."""
    if 16 * fld.m > 63:
        msg = f"matrix keys need 16*m <= 63 bits; {fld} is too large"
        raise CapacityError(msg, limit=3, hint="matrix-keyed indexing is for q <= 8")
    flat = np.asarray(A, dtype=np.int64).reshape(*np.shape(A)[:-2], 16)
    shifts = np.arange(15, -1, -1, dtype=np.int64) * fld.m
    return np.bitwise_or.reduce(flat << shifts, axis=-1)


def is_identity_batch(A: np.ndarray) -> np.ndarray:
    eye = np.eye(4, dtype=np.int64)
    return np.all(np.asarray(A) == eye, axis=(-2, -1))


# ---------------------------------------------------------------------------
# GroupIndex
# ---------------------------------------------------------------------------


def _all_params(fld: Field, start: int, stop: int) -> ParamsBatch:
    """Vectorized ``params_from_rank`` over ranks start..stop-1."""
    q = fld.q
    nb = borel_order(q)
    rank = np.arange(start, stop, dtype=np.int64)
    big = rank >= nb
    r_b = np.where(big, 0, rank)
    rest_b, g_b = np.divmod(r_b, q - 1)
    al_b, be_b = np.divmod(rest_b, q)
    r_c = np.where(big, rank - nb, 0)
    rest, be2 = np.divmod(r_c, q)
    rest, al2 = np.divmod(rest, q)
    rest, g_c = np.divmod(rest, q - 1)
    al_c, be_c = np.divmod(rest, q)
    return ParamsBatch(
        fld,
        big,
        np.where(big, al_c, al_b),
        np.where(big, be_c, be_b),
        np.where(big, g_c, g_b) + 1,
        np.where(big, al2, 0),
        np.where(big, be2, 0),
    )


def record_dtype(fld: Field) -> np.dtype:
    bits = 5 * fld.m + 1
    for dt in (np.uint16, np.uint32, np.uint64):
        if bits <= np.iinfo(dt).bits:
            return np.dtype(dt)
    msg = f"{fld} parameters do not fit a 64-bit record"  # pragma: no cover
    raise CapacityError(msg)  # pragma: no cover


def params_records(batch: ParamsBatch) -> np.ndarray:
    """Packed (tag, alpha, beta, gamma, alpha2, beta2) records, one per row."""
    m = batch.field.m
    key = (
        (batch.big.astype(np.int64) << 5 * m)
        | (batch.alpha << 4 * m)
        | (batch.beta << 3 * m)
        | (batch.gamma << 2 * m)
        | (batch.alpha2 << m)
        | batch.beta2
    )
    return key.astype(record_dtype(batch.field))


@dataclass
class GroupIndex:
    """Bijection between Sz(q) and 0..|Sz(q)|-1 (rank order: Borel first).

    Ranks are computed arithmetically from the parameters, so index-only mode
    needs no storage.  Full mode (q <= 8) also holds every matrix and a sorted
    key table to map products back to indices.
    """

    field: Field
    matrices: np.ndarray | None = None
    _sorted_keys: np.ndarray | None = field(default=None, repr=False)
    _key_rank: np.ndarray | None = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def size(self) -> int:
        return group_order(self.q)

    @property
    def has_matrices(self) -> bool:
        return self.matrices is not None

    @property
    def identity_index(self) -> int:
        return Borel(self.field, 0, 0, 1).rank

    @cached_property
    def borel_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[: borel_order(self.q)] = True
        return mask

    def params_at(self, i: int) -> BruhatParams:
        return params_from_rank(self.field, i)

    def element_at(self, i: int) -> SuzukiElement:
        if self.matrices is not None:
            return SuzukiElement(
                self.params_at(i), Matrix4(self.field, tuple(int(v) for v in self.matrices[i].ravel()))
            )
        return assemble(self.params_at(i))

    def index_of(self, g: SuzukiElement | BruhatParams) -> int:
        p = g.params if isinstance(g, SuzukiElement) else g
        if p.field != self.field:
            msg = f"element of Sz({p.field.q}) looked up in index of Sz({self.q})"
            raise FieldMismatchError(msg)
        return p.rank

    def records(self, chunk: int = 1 << 20) -> Iterator[np.ndarray]:
        """Sorted packed parameter records, in chunks."""
        for start in range(0, self.size, chunk):
            yield params_records(_all_params(self.field, start, min(self.size, start + chunk)))

    def lookup(self, A: np.ndarray) -> np.ndarray:
        """Indices of a stack of matrices (full mode)."""
        if self._sorted_keys is None or self._key_rank is None:
            msg = "matrix lookup needs a full-mode GroupIndex"
            raise CapacityError(msg, limit=FULL_INDEX_MAX_Q, hint="enumerate with q <= 8")
        keys = matrix_keys(self.field, A)
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        if not np.all(self._sorted_keys[pos] == keys):
            msg = "product left the enumerated group (closure failure)"
            raise InternalConsistencyError(msg)
        return self._key_rank[pos]

    def right_action(self, s: SuzukiElement) -> np.ndarray:
        """table[i] = index of element_i * s."""
        if self.matrices is None:
            msg = "right action tables need a full-mode GroupIndex"
            raise CapacityError(msg, limit=FULL_INDEX_MAX_Q, hint="enumerate with q <= 8")
        s_mat = np.asarray(s.matrix.entries, dtype=np.int64).reshape(4, 4)
        return self.lookup(matmul_batch(self.field, self.matrices, s_mat))

    def generator_table(self, a: SuzukiElement, b: SuzukiElement) -> np.ndarray:
        """N x 4 table of right multiplication by a, a^-1, b, b^-1."""
        for g in (a, b):
            if g.field != self.field:
                msg = f"generator from Sz({g.field.q}) used with index of Sz({self.q})"
                raise FieldMismatchError(msg)
        cols = [self.right_action(s) for s in (a, inverse(a), b, inverse(b))]
        return np.stack(cols, axis=1)

    def mask_of(self, elements: Iterator[SuzukiElement] | Sequence[SuzukiElement]) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        for g in elements:
            mask[self.index_of(g)] = True
        return mask


def enumerate_group(fld: Field, *, with_matrices: bool | None = None) -> GroupIndex:
    """Enumerate Sz(q): full mode with matrices for q <= 8, index-only up to q = 32."""
    q = fld.q
    if with_matrices is None:
        with_matrices = q <= FULL_INDEX_MAX_Q
    limit = FULL_INDEX_MAX_Q if with_matrices else PARAMS_INDEX_MAX_Q
    if q > limit:
        mode = "full" if with_matrices else "index-only"
        msg = f"Sz({q}) is too large for {mode} enumeration (limit q <= {limit})"
        raise CapacityError(msg, limit=limit, hint="use sampled experiments for larger q")
    if not with_matrices:
        logger.info("indexed Sz(%d) by parameters: %d elements", q, group_order(q))
        return GroupIndex(fld)

    batch = _all_params(fld, 0, group_order(q))
    matrices = assemble_batch(batch)
    keys = matrix_keys(fld, matrices)
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    if np.any(sorted_keys[1:] == sorted_keys[:-1]):
        msg = f"parametrisation collision while enumerating Sz({q})"
        raise InternalConsistencyError(msg)
    logger.info("enumerated Sz(%d): %d matrices", q, len(matrices))
    return GroupIndex(fld, matrices=matrices, _sorted_keys=sorted_keys, _key_rank=order)
