"""Random walks driven by {a, a^-1, b, b^-1} and their mass on subgroups.

Three representations of a walk distribution:

* ``EXACT``: a probability vector over a full-mode GroupIndex (q = 8),
  advanced by the 4-sparse transition operator;
* ``SPARSE``: a handful of exact atoms (the one-step measure without an index);
* ``SAMPLED``: endpoint matrices of independent walks from the identity.

Subgroup targets carry a vectorized membership predicate on stacks of
matrices, so the same target works on exact vectors and on samples.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from suzuki_lab.errors import CapacityError, FieldMismatchError, InternalConsistencyError
from suzuki_lab.field import Field, subfield_union
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import (
    GroupIndex,
    ParamsBatch,
    SubfieldSubgroup,
    SuzukiElement,
    assemble_batch,
    charpoly_batch,
    cyclic_elements,
    group_order,
    inverse,
    is_identity_batch,
    matmul_batch,
    random_element,
    random_params,
    symplectic_inverse_batch,
)

logger = logging.getLogger(__name__)

WALK_BUDGET = 10**9
SAMPLE_CHUNK = 1 << 14
MASS_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# Generator pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorPair:
    a: SuzukiElement
    b: SuzukiElement
    provenance: str = "explicit"

    def __post_init__(self) -> None:
        if self.a.field != self.b.field:
            msg = f"generators from Sz({self.a.field.q}) and Sz({self.b.field.q})"
            raise FieldMismatchError(msg)

    @property
    def field(self) -> Field:
        return self.a.field

    def generators(self) -> list[SuzukiElement]:
        """[a, a^-1, b, b^-1]."""
        return [self.a, inverse(self.a), self.b, inverse(self.b)]

    def generator_stack(self) -> np.ndarray:
        return np.stack(
            [np.asarray(g.matrix.entries, dtype=np.int64).reshape(4, 4) for g in self.generators()]
        )


def random_pair(fld: Field, seed: int, *labels: object) -> GeneratorPair:
    rng = rng_for(seed, "pair", *labels)
    a = random_element(fld, rng)
    b = random_element(fld, rng)
    provenance = "seed=" + "/".join(str(x) for x in (seed, *labels))
    return GeneratorPair(a, b, provenance)


# ---------------------------------------------------------------------------
# Subgroup targets
# ---------------------------------------------------------------------------


class TargetKind(StrEnum):
    BOREL = "borel"
    SUBFIELD = "subfield"
    CYCLIC = "cyclic"
    CUSTOM = "custom"


Predicate = Callable[[np.ndarray], np.ndarray]
Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class SubgroupTarget:
    """A subgroup H (or its conjugate x^-1 H x) given by a batch predicate."""

    kind: TargetKind
    label: str
    field: Field
    predicate: Predicate = field(repr=False)
    sampler: Sampler = field(repr=False)
    order: int | None = None
    conjugator: SuzukiElement | None = None

    @property
    def tag(self) -> str:
        return self.label if self.conjugator is None else f"{self.label}^x"

    def contains_batch(self, A: np.ndarray) -> np.ndarray:
        """Membership of each matrix in x^-1 H x (g in x^-1 H x iff x g x^-1 in H)."""
        A = np.asarray(A, dtype=np.int64)
        if self.conjugator is not None:
            X = np.asarray(self.conjugator.matrix.entries, dtype=np.int64).reshape(4, 4)
            A = matmul_batch(self.field, matmul_batch(self.field, X, A), symplectic_inverse_batch(X))
        return np.asarray(self.predicate(A), dtype=bool)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        H = self.sampler(rng, size)
        if self.conjugator is None:
            return H
        X = np.asarray(self.conjugator.matrix.entries, dtype=np.int64).reshape(4, 4)
        return matmul_batch(self.field, matmul_batch(self.field, symplectic_inverse_batch(X), H), X)

    def conjugated(self, x: SuzukiElement) -> SubgroupTarget:
        if x.field != self.field:
            msg = f"conjugator from Sz({x.field.q}) for a target in Sz({self.field.q})"
            raise FieldMismatchError(msg)
        return _register(
            SubgroupTarget(self.kind, self.label, self.field, self.predicate, self.sampler, self.order, x)
        )

    def stationary_mass(self) -> float | None:
        if self.order is None:
            return None
        return self.order / group_order(self.field.q)

    def mask(self, index: GroupIndex) -> np.ndarray:
        if index.matrices is None:
            msg = "subgroup masks need a full-mode GroupIndex"
            raise CapacityError(msg, limit=8, hint="use sampled walks for q > 8")
        return self.contains_batch(index.matrices)

    def self_check(self, rng: np.random.Generator, pairs: int = 1000) -> None:
        """Products of sampled members must be members."""
        x = self.sample(rng, pairs)
        y = self.sample(rng, pairs)
        if not self.contains_batch(x).all():
            msg = f"target {self.tag}: sampler produced non-members"
            raise InternalConsistencyError(msg)
        if not self.contains_batch(matmul_batch(self.field, x, y)).all():
            msg = f"target {self.tag}: predicate not closed under multiplication"
            raise InternalConsistencyError(msg)


def _register(target: SubgroupTarget) -> SubgroupTarget:
    target.self_check(rng_for(0, "target-self-check", target.tag, target.field.q))
    return target


def _borel_predicate(A: np.ndarray) -> np.ndarray:
    return np.asarray(A)[..., 0, 3] == 0


def borel_target(fld: Field) -> SubgroupTarget:
    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        batch = random_params(fld, rng, size)
        batch = ParamsBatch(
            fld, np.zeros(size, dtype=bool), batch.alpha, batch.beta, batch.gamma,
            np.zeros(size, dtype=np.int64), np.zeros(size, dtype=np.int64),
        )  # fmt: skip
        return assemble_batch(batch)

    q = fld.q
    return _register(
        SubgroupTarget(TargetKind.BOREL, "B", fld, _borel_predicate, sampler, q * q * (q - 1))
    )


def subfield_target(sub: SubfieldSubgroup) -> SubgroupTarget:
    """Embedded Sz(q0): matrices with every entry in GF(q0)."""
    image = np.array(sorted(sub.embedding.image), dtype=np.int64)
    emb = np.array([sub.embedding.embed_bits(x) for x in range(sub.sub.q)], dtype=np.int64)

    def predicate(A: np.ndarray) -> np.ndarray:
        return np.isin(np.asarray(A), image).all(axis=(-2, -1))

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        p = random_params(sub.sub, rng, size)
        lifted = ParamsBatch(
            sub.big, p.big, emb[p.alpha], emb[p.beta], emb[p.gamma], emb[p.alpha2], emb[p.beta2]
        )
        return assemble_batch(lifted)

    return _register(
        SubgroupTarget(TargetKind.SUBFIELD, f"Sz({sub.sub.q})", sub.big, predicate, sampler, sub.order)
    )


def _as_keys(A: np.ndarray) -> list[bytes]:
    flat = np.ascontiguousarray(np.asarray(A, dtype=np.int64).reshape(-1, 16))
    return [row.tobytes() for row in flat]


def _set_target(
    kind: TargetKind, label: str, fld: Field, members: Sequence[SuzukiElement]
) -> SubgroupTarget:
    stack = np.stack([np.asarray(g.matrix.entries, dtype=np.int64).reshape(4, 4) for g in members])
    keys = set(_as_keys(stack))

    def predicate(A: np.ndarray) -> np.ndarray:
        A = np.asarray(A)
        found = np.array([k in keys for k in _as_keys(A)], dtype=bool)
        return found.reshape(A.shape[:-2])

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return stack[rng.integers(0, len(stack), size=size)]

    return _register(SubgroupTarget(kind, label, fld, predicate, sampler, len(keys)))


def cyclic_target(g: SuzukiElement) -> SubgroupTarget:
    members = cyclic_elements(g)
    return _set_target(TargetKind.CYCLIC, f"<g>_{len(members)}", g.field, members)


def custom_target(label: str, members: Sequence[SuzukiElement]) -> SubgroupTarget:
    if not members:
        msg = "custom target needs at least one element"
        raise ValueError(msg)
    return _set_target(TargetKind.CUSTOM, label, members[0].field, members)


def whole_group_target(fld: Field) -> SubgroupTarget:
    def predicate(A: np.ndarray) -> np.ndarray:
        return np.ones(np.shape(A)[:-2], dtype=bool)

    def sampler(rng: np.random.Generator, size: int) -> np.ndarray:
        return assemble_batch(random_params(fld, rng, size))

    return _register(
        SubgroupTarget(TargetKind.CUSTOM, "G", fld, predicate, sampler, group_order(fld.q))
    )


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


class WalkMode(StrEnum):
    EXACT = "exact"
    SPARSE = "sparse"
    SAMPLED = "sampled"


@dataclass
class WalkDistribution:
    mode: WalkMode
    field: Field
    steps: int = 0
    pair: GeneratorPair | None = None
    index: GroupIndex | None = None
    probabilities: np.ndarray | None = None
    table: np.ndarray | None = None
    atoms: dict[SuzukiElement, float] = field(default_factory=dict)
    endpoints: np.ndarray | None = None
    trials: int = 0
    seed: int | None = None

    def total_mass(self) -> float:
        if self.mode is WalkMode.EXACT:
            return float(self.probabilities.sum())  # type: ignore[union-attr]
        if self.mode is WalkMode.SPARSE:
            return float(sum(self.atoms.values()))
        return 1.0

    def endpoint_matrices(self) -> np.ndarray:
        if self.endpoints is None:
            msg = f"{self.mode} distribution has no endpoint samples"
            raise ValueError(msg)
        return self.endpoints


def mu(pair: GeneratorPair, index: GroupIndex | None = None) -> WalkDistribution:
    """One step: mass 1/4 on each of a, a^-1, b, b^-1 (coinciding points add)."""
    if index is None:
        atoms: dict[SuzukiElement, float] = {}
        for g in pair.generators():
            atoms[g] = atoms.get(g, 0.0) + 0.25
        return WalkDistribution(WalkMode.SPARSE, pair.field, steps=1, pair=pair, atoms=atoms)
    start = delta_identity(index, pair)
    return convolve_exact(start, 1)


def delta_identity(index: GroupIndex, pair: GeneratorPair) -> WalkDistribution:
    if index.field != pair.field:
        msg = f"pair from Sz({pair.field.q}) used with index of Sz({index.q})"
        raise FieldMismatchError(msg)
    p = np.zeros(index.size, dtype=np.float64)
    p[index.identity_index] = 1.0
    return WalkDistribution(
        WalkMode.EXACT,
        index.field,
        pair=pair,
        index=index,
        probabilities=p,
        table=index.generator_table(pair.a, pair.b),
    )


def _step(p: np.ndarray, table: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    quarter = 0.25 * p
    for j in range(table.shape[1]):
        # each column is a permutation of the index range
        out[table[:, j]] += quarter
    return out


def convolve_exact(dist: WalkDistribution, steps: int) -> WalkDistribution:
    """Advance an exact distribution by ``steps`` applications of the walk operator."""
    if dist.mode is not WalkMode.EXACT or dist.probabilities is None or dist.table is None:
        msg = "exact convolution needs an exact distribution built on a GroupIndex"
        raise ValueError(msg)
    if steps < 0:
        msg = f"steps must be >= 0, got {steps}"
        raise ValueError(msg)
    p = dist.probabilities
    for _ in range(steps):
        p = _step(p, dist.table)
    if abs(p.sum() - 1.0) > MASS_TOLERANCE * max(1, steps):
        msg = f"mass drifted to {p.sum()!r} after {steps} steps"
        raise InternalConsistencyError(msg)
    return WalkDistribution(
        WalkMode.EXACT,
        dist.field,
        steps=dist.steps + steps,
        pair=dist.pair,
        index=dist.index,
        probabilities=p,
        table=dist.table,
    )


def exact_walk(pair: GeneratorPair, index: GroupIndex, steps: int) -> WalkDistribution:
    """mu^(steps) from the identity."""
    return convolve_exact(delta_identity(index, pair), steps)


def sample_walk(pair: GeneratorPair, n: int, trials: int, seed: int) -> WalkDistribution:
    """``trials`` independent n-step walks from the identity.

    Trials are drawn in fixed-size chunks, each chunk from its own stream
    named by (seed, chunk number), so results do not depend on scheduling.
    """
    if n < 0 or trials < 0:
        msg = f"n and trials must be >= 0 (got n={n}, trials={trials})"
        raise ValueError(msg)
    if n * trials > WALK_BUDGET:
        msg = f"walk budget exceeded: n * trials = {n * trials} > {WALK_BUDGET}"
        raise CapacityError(msg, limit=WALK_BUDGET, hint="reduce trials or walk length")
    fld = pair.field
    gens = pair.generator_stack()
    chunks = []
    for c, start in enumerate(range(0, trials, SAMPLE_CHUNK)):
        size = min(SAMPLE_CHUNK, trials - start)
        rng = rng_for(seed, "walk", pair.provenance, n, c)
        cur = np.broadcast_to(np.eye(4, dtype=np.int64), (size, 4, 4)).copy()
        for _ in range(n):
            cur = matmul_batch(fld, cur, gens[rng.integers(0, 4, size=size)])
        chunks.append(cur)
    endpoints = np.concatenate(chunks) if chunks else np.zeros((0, 4, 4), dtype=np.int64)
    return WalkDistribution(
        WalkMode.SAMPLED, fld, steps=n, pair=pair, endpoints=endpoints, trials=trials, seed=seed
    )


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassEstimate:
    """mu(H); sampled estimates carry a normal-approximation 95% half-width."""

    mass: float
    half_width: float = 0.0
    trials: int | None = None

    @property
    def exact(self) -> bool:
        return self.trials is None


def _half_width(p: float, n: int) -> float:
    return 1.96 * math.sqrt(p * (1 - p) / n) if n else 0.0


def subgroup_mass(dist: WalkDistribution, H: SubgroupTarget) -> MassEstimate:
    if H.field != dist.field:
        msg = f"target in Sz({H.field.q}) measured on a walk in Sz({dist.field.q})"
        raise FieldMismatchError(msg)
    if dist.mode is WalkMode.EXACT:
        assert dist.index is not None and dist.probabilities is not None
        return MassEstimate(float(dist.probabilities[H.mask(dist.index)].sum()))
    if dist.mode is WalkMode.SPARSE:
        atoms = list(dist.atoms.items())
        stack = np.stack([np.asarray(g.matrix.entries, dtype=np.int64).reshape(4, 4) for g, _ in atoms])
        inside = H.contains_batch(stack)
        return MassEstimate(float(sum(w for (_, w), ok in zip(atoms, inside, strict=True) if ok)))
    endpoints = dist.endpoint_matrices()
    if dist.trials == 0:
        return MassEstimate(0.0, 0.0, 0)
    p = float(H.contains_batch(endpoints).mean())
    return MassEstimate(p, _half_width(p, dist.trials), dist.trials)


def total_variation(dist: WalkDistribution) -> float:
    """Total-variation distance of an exact distribution to uniform."""
    if dist.mode is not WalkMode.EXACT or dist.probabilities is None:
        msg = "total variation needs an exact distribution"
        raise ValueError(msg)
    p = dist.probabilities
    return 0.5 * float(np.abs(p - 1.0 / len(p)).sum())


def symmetry_defect(dist: WalkDistribution) -> float:
    """max_g |mu(g) - mu(g^-1)| for an exact distribution."""
    if dist.index is None or dist.index.matrices is None or dist.probabilities is None:
        msg = "symmetry check needs an exact distribution on a full-mode index"
        raise ValueError(msg)
    inv_idx = dist.index.lookup(symplectic_inverse_batch(dist.index.matrices))
    p = dist.probabilities
    return float(np.abs(p - p[inv_idx]).max())


def agreement(exact: MassEstimate, sampled: MassEstimate) -> float:
    """z-score of a sampled mass against the exact mass."""
    if not sampled.trials:
        return 0.0
    p = exact.mass
    sd = math.sqrt(max(p * (1 - p), 0.0) / sampled.trials)
    if sd == 0:
        return 0.0 if sampled.mass == p else math.inf
    return (sampled.mass - p) / sd


def algebraic_case_bound(n0: int) -> float:
    """n0^8 (sqrt(3)/2)^(2 n0): non-concentration estimate for solvable subgroups."""
    return n0**8 * (math.sqrt(3) / 2) ** (2 * n0)


def n_schedule(q: int, constants: Sequence[float] = (5, 10, 20, 40)) -> list[int]:
    """[ceil(C log q) for each C]."""
    return [math.ceil(c * math.log(q)) for c in constants]


@dataclass(frozen=True)
class CauchySchwarzCheck:
    n: int
    m: int
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + MASS_TOLERANCE


def cauchy_schwarz_check(
    pair: GeneratorPair, H: SubgroupTarget, n: int, m: int, index: GroupIndex
) -> CauchySchwarzCheck:
    """mu^(n+m)(H) <= mu^(2n)(H)^(1/2), computed exactly."""
    mask = H.mask(index)
    dist = delta_identity(index, pair)
    masses: dict[int, float] = {}
    targets = sorted({n + m, 2 * n})
    done = 0
    for t in targets:
        dist = convolve_exact(dist, t - done)
        done = t
        masses[t] = float(dist.probabilities[mask].sum())  # type: ignore[index]
    return CauchySchwarzCheck(n, m, masses[n + m], math.sqrt(masses[2 * n]))


def mass_trajectory(
    pair: GeneratorPair, H: SubgroupTarget, steps: Sequence[int], index: GroupIndex
) -> list[tuple[int, float]]:
    """Exact mu^(n)(H) for each n in ``steps`` (sorted)."""
    mask = H.mask(index)
    dist = delta_identity(index, pair)
    out = []
    done = 0
    for n in sorted(steps):
        dist = convolve_exact(dist, n - done)
        done = n
        out.append((n, float(dist.probabilities[mask].sum())))  # type: ignore[index]
    return out


# ---------------------------------------------------------------------------
# sigma_1 / sigma_2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaEstimate:
    """Monte Carlo estimate over (pair, word) samples."""

    name: str
    q: int
    word_length: int
    samples: int
    hits: int
    verified_hits: int = 0

    @property
    def estimate(self) -> float:
        return self.hits / self.samples if self.samples else 0.0

    @property
    def half_width(self) -> float:
        return _half_width(self.estimate, self.samples)

    @property
    def bound_shape(self) -> float:
        """q^(-1/6) log q for sigma_1, q^(-1/2) log q for sigma_2."""
        exponent = -1 / 6 if self.name == "sigma1" else -1 / 2
        return self.q**exponent * math.log(self.q)


def _word_endpoints(
    fld: Field,
    word_length: int,
    word_samples: int,
    pair_samples: int,
    rng: np.random.Generator,
    pair: GeneratorPair | None,
) -> np.ndarray:
    """w(a, b) for pair_samples pairs x word_samples uniform generator strings."""
    if pair is None:
        A = assemble_batch(random_params(fld, rng, pair_samples))
        B = assemble_batch(random_params(fld, rng, pair_samples))
        gens = np.stack([A, symplectic_inverse_batch(A), B, symplectic_inverse_batch(B)], axis=1)
    else:
        gens = np.broadcast_to(pair.generator_stack(), (pair_samples, 4, 4, 4))
    gens = np.repeat(gens, word_samples, axis=0)
    total = len(gens)
    rows = np.arange(total)
    cur = np.broadcast_to(np.eye(4, dtype=np.int64), (total, 4, 4)).copy()
    for _ in range(word_length):
        cur = matmul_batch(fld, cur, gens[rows, rng.integers(0, 4, size=total)])
    return cur


def sigma1_estimate(
    fld: Field,
    word_length: int,
    word_samples: int,
    pair_samples: int,
    rng: np.random.Generator,
    *,
    pair: GeneratorPair | None = None,
) -> SigmaEstimate:
    """P(some c_i(w(a, b)) lies in a proper subfield, excluding 0)."""
    targets = np.array(sorted(subfield_union(fld) - {0}), dtype=np.int64)
    W = _word_endpoints(fld, word_length, word_samples, pair_samples, rng, pair)
    c1, c2, c3 = charpoly_batch(fld, W)
    hit = np.isin(c1, targets) | np.isin(c2, targets) | np.isin(c3, targets)
    return SigmaEstimate("sigma1", fld.q, word_length, len(W), int(hit.sum()))


def sigma2_estimate(
    fld: Field,
    word_length: int,
    word_samples: int,
    pair_samples: int,
    rng: np.random.Generator,
    *,
    pair: GeneratorPair | None = None,
) -> SigmaEstimate:
    """P(c1 = c2 = c3 = 0); every hit is checked to satisfy w(a, b)^4 = 1."""
    W = _word_endpoints(fld, word_length, word_samples, pair_samples, rng, pair)
    c1, c2, c3 = charpoly_batch(fld, W)
    hit = (c1 == 0) & (c2 == 0) & (c3 == 0)
    H = W[hit]
    H2 = matmul_batch(fld, H, H)
    fourth = matmul_batch(fld, H2, H2)
    ok = is_identity_batch(fourth)
    if not ok.all():
        msg = f"{int((~ok).sum())} sigma2 hits have w(a,b)^4 != 1"
        raise InternalConsistencyError(msg)
    return SigmaEstimate("sigma2", fld.q, word_length, len(W), int(hit.sum()), int(ok.sum()))


# ---------------------------------------------------------------------------
# Non-concentration table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MassRow:
    q: int
    pair: str
    target: str
    n: int
    mass: float
    half_width: float
    stationary: float | None
    threshold: float

    @property
    def flagged(self) -> bool:
        return self.mass >= self.threshold


def nonconcentration_report(
    pair: GeneratorPair,
    n_values: Sequence[int],
    targets: Sequence[SubgroupTarget],
    *,
    delta0: float = 0.25,
    index: GroupIndex | None = None,
    trials: int = 10_000,
    seed: int = 0,
) -> list[MassRow]:
    """mu^(n)(H) for each target and n; exact with an index, sampled otherwise."""
    q = pair.field.q
    threshold = q**-delta0
    rows: list[MassRow] = []
    ordered = sorted(set(n_values))
    if index is not None:
        masks = [H.mask(index) for H in targets]
        dist = delta_identity(index, pair)
        done = 0
        for n in ordered:
            dist = convolve_exact(dist, n - done)
            done = n
            for H, mask in zip(targets, masks, strict=True):
                mass = float(dist.probabilities[mask].sum())  # type: ignore[index]
                rows.append(MassRow(q, pair.provenance, H.tag, n, mass, 0.0, H.stationary_mass(), threshold))
        return rows
    for n in ordered:
        dist = sample_walk(pair, n, trials, seed)
        for H in targets:
            est = subgroup_mass(dist, H)
            rows.append(
                MassRow(q, pair.provenance, H.tag, n, est.mass, est.half_width, H.stationary_mass(), threshold)
            )
    return rows
