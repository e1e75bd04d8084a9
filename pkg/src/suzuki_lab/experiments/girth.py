"""girth: generation, short relations, Kesten's bound and solvability of B."""

from __future__ import annotations

import logging
import math

import numpy as np

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import (
    GenerationStatus,
    assemble_batch,
    element_order,
    enumerate_group,
    generates,
    is_identity_batch,
    matmul_batch,
    random_params,
    symplectic_inverse_batch,
    t_element,
)
from suzuki_lab.walks import borel_target, random_pair
from suzuki_lab.words import (
    A,
    Word,
    free_commutator_pairs_audit,
    girth_test,
    girth_union_bound,
    kesten_ratio,
    parse_word,
    psi,
    relation_probability,
    tuple_vanishing_audit,
)


logger = logging.getLogger(__name__)

COLUMNS = [
    "pair",
    "provenance",
    "generation",
    "closure_size",
    "min_order",
    "girth_passed",
    "relation",
    "words_checked",
]

COMMUTATOR_AUDIT_RADIUS = 3


def _psi3_identities(fld, tuples: list[np.ndarray]) -> int:
    value = psi(3, tuples, mul=lambda x, y: matmul_batch(fld, x, y), inv=symplectic_inverse_batch)
    return int(is_identity_batch(value).sum())


def _kesten_criteria(report: ExperimentReport, n_max: int) -> None:
    kesten = [kesten_ratio(n) for n in range(n_max + 1)]
    report.criteria.append(
        Criterion.check(
            "kesten",
            all(k.within_bound for k in kesten),
            f"closed walks of length n <= {n_max} in the 4-regular tree are at most (2 sqrt 3)^n",
            measured=max(k.ratio for k in kesten),
            bound=1.0,
            shape="(2 sqrt 3)^n",
        )
    )
    report.criteria.append(
        Criterion.check(
            "kesten-cross-check",
            all(k.closed_walks == k.tree_count for k in kesten),
            "reduction count agrees with the tree path recursion",
        )
    )
    report.facts["closed_walks"] = [k.closed_walks for k in kesten]


def _solvability_criteria(ctx: RunContext, report: ExperimentReport, fld) -> None:
    count = ctx.config.budgets.tuples
    rng = rng_for(ctx.seed, "girth", "psi3")
    borel = borel_target(fld)
    borel_ids = _psi3_identities(fld, [borel.sample(rng, count) for _ in range(8)])
    full_ids = _psi3_identities(fld, [assemble_batch(random_params(fld, rng, count)) for _ in range(8)])
    report.criteria.append(
        Criterion.check(
            "borel-solvable",
            borel_ids == count,
            f"psi_3 is the identity on {borel_ids}/{count} random 8-tuples from B",
            measured=borel_ids,
            bound=count,
        )
    )
    report.criteria.append(
        Criterion.check(
            "group-not-solvable",
            full_ids < count,
            f"psi_3 is not the identity on {count - full_ids}/{count} random 8-tuples from Sz({fld.q})",
            measured=count - full_ids,
            bound=1,
        )
    )


def _free_group_criteria(ctx: RunContext, report: ExperimentReport) -> None:
    audit = free_commutator_pairs_audit(COMMUTATOR_AUDIT_RADIUS)
    report.criteria.append(
        Criterion.check(
            "free-centralisers",
            audit.passed,
            f"{audit.commuting_pairs} commuting pairs in ball({audit.radius})^2, all powers of a common word",
        )
    )
    L = ctx.config.budgets.girth_radius
    powers = [Word((A,) * k) for k in range(L + 1)]
    vanishing = tuple_vanishing_audit(powers, 1)
    report.criteria.append(
        Criterion.report(
            "tuple-vanishing",
            f"psi_1 vanishes on powers of a up to {L} (vanishes={vanishing.vanishes})",
            measured=vanishing.set_size,
            bound=vanishing.explicit_bound,
            shape="5^(2l) 4^(l^2) L^(2l)",
        )
    )


@register(ExperimentName.GIRTH)
def run_girth(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    q = cfg.q
    fld = field_new(q.bit_length() - 1)
    L = cfg.budgets.girth_radius
    pairs = cfg.budgets.pairs
    index = enumerate_group(fld) if q <= 8 else None
    report = ctx.new_report(COLUMNS, girth_radius=L)

    generating = girthy = short = 0
    first_b = None
    for i in range(pairs):
        pair = random_pair(fld, ctx.seed, "girth", i)
        first_b = first_b or pair.b
        gen = generates(pair.a, pair.b, index=index)
        result = girth_test(pair.a, pair.b, L)
        min_order = min(element_order(pair.a), element_order(pair.b))
        short += min_order <= L
        generating += gen.status is GenerationStatus.GENERATES
        girthy += result.passed
        report.rows.append(
            {
                "pair": i,
                "provenance": pair.provenance,
                "generation": gen.status,
                "closure_size": gen.closure_size,
                "min_order": min_order,
                "girth_passed": result.passed,
                "relation": result.relation_text or "",
                "words_checked": result.words_checked,
            }
        )
    logger.info("girth q=%d: %d/%d generate, %d/%d pass radius %d", q, generating, pairs, girthy, pairs, L)

    need_gen = math.ceil(cfg.thresholds.generation_pass * pairs)
    report.criteria.append(
        Criterion.check(
            "generation",
            generating >= need_gen,
            f"{generating}/{pairs} random pairs generate Sz({q}) (need {need_gen})",
            measured=generating,
            bound=need_gen,
        )
    )
    need_girth = math.ceil(cfg.thresholds.girth_pass * pairs)
    report.criteria.append(
        Criterion.check(
            "girth",
            girthy >= need_girth,
            f"{girthy}/{pairs} random pairs satisfy no relation of length <= {L} (need {need_girth})",
            measured=girthy,
            bound=need_girth,
        )
    )
    # a^k = 1 is a relation of length k, so these pairs cannot pass
    report.criteria.append(
        Criterion.report(
            "girth-short-orders",
            f"{short}/{pairs} pairs have a generator of order <= {L}",
            measured=short,
            bound=pairs - need_girth,
        )
    )
    if first_b is not None:
        involution = girth_test(t_element(fld), first_b, 2)
        report.criteria.append(
            Criterion.check(
                "involution-relation",
                not involution.passed and involution.relation == parse_word("aa"),
                f"a = T gives relation {involution.relation_text} at radius 2",
            )
        )

    _kesten_criteria(report, cfg.budgets.kesten_max)
    _solvability_criteria(ctx, report, fld)
    _free_group_criteria(ctx, report)

    prob = relation_probability(
        parse_word("abAB"), fld, cfg.budgets.trials, rng_for(ctx.seed, "girth", "relation-probability")
    )
    report.criteria.append(
        Criterion.report(
            "relation-probability",
            f"P(a, b outside B and [a, b] = 1) over {prob.samples} pairs",
            measured=prob.estimate,
            bound=prob.bound_shape,
            shape="q^(-1/2) log q",
        )
    )
    union = girth_union_bound(q, cfg.thresholds.kappa)
    report.criteria.append(
        Criterion.report(
            "girth-union-bound",
            f"kappa = {cfg.thresholds.kappa} (admissible below {union.kappa_threshold:.4f}), radius {union.radius}",
            measured=union.value,
            shape="q^(kappa log 3 - 1/2) log q",
        )
    )
    return report
