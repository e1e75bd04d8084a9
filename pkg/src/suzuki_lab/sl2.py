"""SL2(q) in characteristic 2: the comparison track.

Everything here runs on stacks of 2x2 matrices of field bit patterns, over
any GF(2^m) (even m included; no theta map is needed).  Word evaluation goes
through ``words.evaluate`` with batch multiplication and inversion plugged in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from suzuki_lab.errors import CapacityError, FieldMismatchError
from suzuki_lab.field import Field, binary_field, subfield_embedding, subfield_union
from suzuki_lab.seeding import rng_for
from suzuki_lab.words import A, Word, evaluate, psi

logger = logging.getLogger(__name__)

ENUMERATE_MAX_Q = 64
EXACT_PAIRS_LIMIT = 1 << 20
MIN_TRACE_SAMPLES = 10_000
SAMPLE_CHUNK = 1 << 14
TRACE_SHAPE_CONSTANT = 10.0


def sl2_order(q: int) -> int:
    return q * (q * q - 1)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SL2Element:
    """[[a, b], [c, d]] over ``field`` with ad + bc = 1."""

    field: Field
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        fld = self.field
        if fld.mul(self.a, self.d) ^ fld.mul(self.b, self.c) != 1:
            msg = f"[[{self.a}, {self.b}], [{self.c}, {self.d}]] has determinant != 1 over {fld}"
            raise ValueError(msg)

    @classmethod
    def from_array(cls, fld: Field, X: np.ndarray) -> SL2Element:
        return cls(fld, int(X[0, 0]), int(X[0, 1]), int(X[1, 0]), int(X[1, 1]))

    @classmethod
    def identity(cls, fld: Field) -> SL2Element:
        return cls(fld, 1, 0, 0, 1)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)

    def __mul__(self, other: SL2Element) -> SL2Element:
        if other.field != self.field:
            msg = f"SL2 product across {self.field} and {other.field}"
            raise FieldMismatchError(msg)
        mul = self.field.mul
        return SL2Element(
            self.field,
            mul(self.a, other.a) ^ mul(self.b, other.c),
            mul(self.a, other.b) ^ mul(self.b, other.d),
            mul(self.c, other.a) ^ mul(self.d, other.c),
            mul(self.c, other.b) ^ mul(self.d, other.d),
        )

    def inverse(self) -> SL2Element:
        return SL2Element(self.field, self.d, self.b, self.c, self.a)

    @property
    def trace(self) -> int:
        return self.a ^ self.d

    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)


# ---------------------------------------------------------------------------
# Batches
# ---------------------------------------------------------------------------


def mul_batch(fld: Field, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Products of stacks of 2x2 matrices, broadcasting leading axes."""
    mul = fld.mul_array
    out = np.empty(np.broadcast_shapes(X.shape, Y.shape), dtype=np.int64)
    for i in range(2):
        for j in range(2):
            out[..., i, j] = mul(X[..., i, 0], Y[..., 0, j]) ^ mul(X[..., i, 1], Y[..., 1, j])
    return out


def inverse_batch(X: np.ndarray) -> np.ndarray:
    # [[a, b], [c, d]]^-1 = [[d, b], [c, a]] in characteristic 2
    return np.asarray(X)[..., ::-1, ::-1].swapaxes(-1, -2)


def trace_batch(X: np.ndarray) -> np.ndarray:
    return X[..., 0, 0] ^ X[..., 1, 1]


def det_batch(fld: Field, X: np.ndarray) -> np.ndarray:
    return fld.mul_array(X[..., 0, 0], X[..., 1, 1]) ^ fld.mul_array(X[..., 0, 1], X[..., 1, 0])


def is_identity_batch(X: np.ndarray) -> np.ndarray:
    return np.all(np.asarray(X) == np.eye(2, dtype=np.int64), axis=(-2, -1))


def _chart(fld: Field, t1: np.ndarray, t2: np.ndarray, t3: np.ndarray) -> np.ndarray:
    """[[t1, t2], [t3, (t2 t3 + 1)/t1]] for nonzero t1."""
    out = np.empty((len(t1), 2, 2), dtype=np.int64)
    out[:, 0, 0], out[:, 0, 1], out[:, 1, 0] = t1, t2, t3
    out[:, 1, 1] = fld.mul_array(fld.mul_array(t2, t3) ^ 1, fld.inv_array(t1))
    return out


def _stratum(fld: Field, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    """[[0, c^-1], [c, d]] for nonzero c."""
    out = np.zeros((len(c), 2, 2), dtype=np.int64)
    out[:, 0, 1] = fld.inv_array(c)
    out[:, 1, 0], out[:, 1, 1] = c, d
    return out


def sample_batch(fld: Field, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent uniform elements of SL2(q).

    The t1 = 0 stratum holds q(q - 1) of the q(q^2 - 1) elements, so each
    draw lands there with probability 1/(q + 1).
    """
    q = fld.q
    on_stratum = rng.integers(0, q + 1, size=size) == 0
    out = np.empty((size, 2, 2), dtype=np.int64)
    k = int(on_stratum.sum())
    out[~on_stratum] = _chart(
        fld,
        fld.random_bits(rng, size - k, nonzero=True),
        fld.random_bits(rng, size - k),
        fld.random_bits(rng, size - k),
    )
    out[on_stratum] = _stratum(fld, fld.random_bits(rng, k, nonzero=True), fld.random_bits(rng, k))
    return out


def sl2_sample(fld: Field, seed: int, *labels: object) -> SL2Element:
    """One uniform element of SL2(q) from the stream named ``labels``."""
    return SL2Element.from_array(fld, sample_batch(fld, rng_for(seed, "sl2", *labels), 1)[0])


def sl2_enumerate(fld: Field) -> np.ndarray:
    """All of SL2(q) as a q(q^2 - 1) x 2 x 2 array: the t1 != 0 chart, then the t1 = 0 stratum."""
    if fld.q > ENUMERATE_MAX_Q:
        msg = f"enumerating SL2({fld.q}) exceeds q <= {ENUMERATE_MAX_Q}"
        raise CapacityError(msg, limit=ENUMERATE_MAX_Q, hint="sample instead")
    q = fld.q
    t1, t2, t3 = np.meshgrid(np.arange(1, q), np.arange(q), np.arange(q), indexing="ij")
    chart = _chart(fld, t1.ravel(), t2.ravel(), t3.ravel())
    c, d = np.meshgrid(np.arange(1, q), np.arange(q), indexing="ij")
    return np.concatenate([chart, _stratum(fld, c.ravel(), d.ravel())])


def evaluate_sl2_batch(fld: Field, w: Word, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """w evaluated at N pairs of SL2 matrices."""
    identity = np.broadcast_to(np.eye(2, dtype=np.int64), X.shape).copy()
    return evaluate(w, X, Y, mul=lambda s, t: mul_batch(fld, s, t), inv=inverse_batch, identity=identity)


# ---------------------------------------------------------------------------
# Trace concentration
# ---------------------------------------------------------------------------


def trace_histogram_exact(fld: Field, w: Word = Word((A,))) -> np.ndarray:
    """Counts of tr(w(a, b)) = x over every pair (a, b) in SL2(q)^2, indexed by x.

    Words in a alone only need one pass over the group.
    """
    if w.is_identity():
        msg = "the trivial word has constant trace"
        raise ValueError(msg)
    G = sl2_enumerate(fld)
    if all(x in (A, A ^ 1) for x in w.letters):
        return np.bincount(trace_batch(evaluate_sl2_batch(fld, w, G, G)), minlength=fld.q)
    if len(G) ** 2 > EXACT_PAIRS_LIMIT:
        msg = f"{len(G)}^2 pairs exceed the exact histogram limit {EXACT_PAIRS_LIMIT}"
        raise CapacityError(msg, limit=EXACT_PAIRS_LIMIT, hint="use trace_concentration")
    counts = np.zeros(fld.q, dtype=np.int64)
    for g in G:
        X = np.broadcast_to(g, G.shape)
        counts += np.bincount(trace_batch(evaluate_sl2_batch(fld, w, X, G)), minlength=fld.q)
    return counts


@dataclass(frozen=True)
class TraceConcentration:
    """Empirical law of tr(w(a, b)) and its largest point mass."""

    q: int
    word: str
    samples: int
    histogram: tuple[int, ...]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.histogram))

    @property
    def max_mass(self) -> float:
        return max(self.histogram) / self.samples

    @property
    def shape_bound(self) -> float:
        """10 / q, the q^(-1+eps) shape with eps = 0; reported only."""
        return TRACE_SHAPE_CONSTANT / self.q

    @property
    def within_shape(self) -> bool:
        return self.max_mass <= self.shape_bound


def trace_counts(fld: Field, w: Word, samples: int, seed: int) -> np.ndarray:
    counts = np.zeros(fld.q, dtype=np.int64)
    for c, start in enumerate(range(0, samples, SAMPLE_CHUNK)):
        size = min(SAMPLE_CHUNK, samples - start)
        rng = rng_for(seed, "sl2-trace", w.to_text(), c)
        X = sample_batch(fld, rng, size)
        Y = sample_batch(fld, rng, size)
        counts += np.bincount(trace_batch(evaluate_sl2_batch(fld, w, X, Y)), minlength=fld.q)
    return counts


def trace_concentration(fld: Field, w: Word, pair_samples: int, seed: int) -> TraceConcentration:
    if w.is_identity():
        msg = "the trivial word has constant trace"
        raise ValueError(msg)
    if pair_samples < MIN_TRACE_SAMPLES:
        msg = f"trace concentration needs at least {MIN_TRACE_SAMPLES} samples, got {pair_samples}"
        raise ValueError(msg)
    counts = trace_counts(fld, w, pair_samples, seed)
    logger.debug("SL2(%d) trace of %s: max count %d / %d", fld.q, w, counts.max(), pair_samples)
    return TraceConcentration(fld.q, w.to_text(), pair_samples, tuple(int(v) for v in counts))


def histogram_z_scores(exact: np.ndarray, sampled: np.ndarray) -> np.ndarray:
    """Per-bin z-scores of sampled counts against exact probabilities."""
    p = exact / exact.sum()
    n = sampled.sum()
    sd = np.sqrt(n * p * (1 - p))
    diff = sampled - n * p
    return np.divide(np.abs(diff), sd, out=np.where(diff == 0, 0.0, np.inf), where=sd > 0)


@dataclass(frozen=True)
class NonconstantTrace:
    word: str
    found: bool
    traces: tuple[int, int] | None
    attempts_used: int


def certify_nonconstant_trace(w: Word, fld: Field, seed: int, attempts: int = 64) -> NonconstantTrace:
    """Two random pairs with different tr(w(a, b)), proving the trace map nonconstant."""
    if w.is_identity():
        return NonconstantTrace(w.to_text(), False, None, 0)
    rng = rng_for(seed, "sl2-nonconstant", w.to_text())
    traces = trace_batch(evaluate_sl2_batch(fld, w, sample_batch(fld, rng, attempts), sample_batch(fld, rng, attempts)))
    diff = np.flatnonzero(traces != traces[0])
    if len(diff) == 0:
        return NonconstantTrace(w.to_text(), False, None, attempts)
    k = int(diff[0])
    return NonconstantTrace(w.to_text(), True, (int(traces[0]), int(traces[k])), k + 1)


# ---------------------------------------------------------------------------
# Walks and subfield mass
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SL2Pair:
    a: SL2Element
    b: SL2Element
    provenance: str = "explicit"

    @property
    def field(self) -> Field:
        return self.a.field

    def generator_stack(self) -> np.ndarray:
        a, b = self.a.as_array(), self.b.as_array()
        return np.stack([a, inverse_batch(a), b, inverse_batch(b)])


def random_sl2_pair(fld: Field, seed: int, *labels: object) -> SL2Pair:
    rng = rng_for(seed, "sl2-pair", *labels)
    X = sample_batch(fld, rng, 2)
    label = "/".join(str(v) for v in ("random", seed, *labels))
    return SL2Pair(SL2Element.from_array(fld, X[0]), SL2Element.from_array(fld, X[1]), label)


def sl2_walk(pair: SL2Pair, n: int, trials: int, seed: int) -> np.ndarray:
    """Endpoints of ``trials`` independent n-step walks from the identity."""
    fld = pair.field
    gens = pair.generator_stack()
    chunks = []
    for c, start in enumerate(range(0, trials, SAMPLE_CHUNK)):
        size = min(SAMPLE_CHUNK, trials - start)
        rng = rng_for(seed, "sl2-walk", pair.provenance, n, c)
        cur = np.broadcast_to(np.eye(2, dtype=np.int64), (size, 2, 2)).copy()
        for _ in range(n):
            cur = mul_batch(fld, cur, gens[rng.integers(0, 4, size=size)])
        chunks.append(cur)
    return np.concatenate(chunks) if chunks else np.zeros((0, 2, 2), dtype=np.int64)


@dataclass(frozen=True)
class SL2SubfieldMass:
    """Walk mass on elements whose trace lies in GF(q0), and in the proper-subfield union."""

    q: int
    q0: int
    n: int
    trials: int
    hits: int
    union_hits: int
    union_size: int

    @property
    def mass(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    @property
    def union_mass(self) -> float:
        return self.union_hits / self.trials if self.trials else 0.0

    @property
    def half_width(self) -> float:
        p = self.union_mass
        return 1.96 * math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    @property
    def heuristic(self) -> float:
        """|union| / q: the mass if traces were uniform."""
        return self.union_size / self.q


def sl2_subfield_mass(
    fld: Field, m0: int, pair: SL2Pair, n: int, trials: int, seed: int
) -> SL2SubfieldMass:
    if fld.m % m0 != 0:
        msg = f"GF(2^{m0}) is not a subfield of {fld}"
        raise ValueError(msg)
    if pair.field != fld:
        msg = f"pair over {pair.field} used with {fld}"
        raise FieldMismatchError(msg)
    traces = trace_batch(sl2_walk(pair, n, trials, seed))
    image = np.zeros(fld.q, dtype=bool)
    image[list(subfield_embedding(binary_field(m0), fld).image)] = True
    union = np.zeros(fld.q, dtype=bool)
    union[list(subfield_union(fld))] = True
    return SL2SubfieldMass(
        q=fld.q,
        q0=1 << m0,
        n=n,
        trials=trials,
        hits=int(image[traces].sum()),
        union_hits=int(union[traces].sum()),
        union_size=int(union.sum()),
    )


# ---------------------------------------------------------------------------
# Solvability of the Borel subgroup
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BorelSolvability:
    samples: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0


def upper_triangular_batch(fld: Field, rng: np.random.Generator, size: int) -> np.ndarray:
    t = fld.random_bits(rng, size, nonzero=True)
    out = np.zeros((size, 2, 2), dtype=np.int64)
    out[:, 0, 0], out[:, 0, 1], out[:, 1, 1] = t, fld.random_bits(rng, size), fld.inv_array(t)
    return out


def psi2_on_sl2_borel(fld: Field, samples: int, seed: int) -> BorelSolvability:
    """psi_2 of four upper-triangular elements is always the identity."""
    rng = rng_for(seed, "sl2-borel-psi2")
    quads = [upper_triangular_batch(fld, rng, samples) for _ in range(4)]
    value = psi(2, quads, mul=lambda s, t: mul_batch(fld, s, t), inv=inverse_batch)
    return BorelSolvability(samples, int((~is_identity_batch(value)).sum()))
