"""spectral: lambda_2 of Cay(Sz(q), {a, b}^+-1) and the dense-solve toy oracles."""

from __future__ import annotations

import logging
import math

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.spectral import CayleyGraph, build_cayley, cyclic_cayley, dense_spectrum, second_eigenvalue, spectral_report
from suzuki_lab.suzuki import GenerationStatus, enumerate_group, generates
from suzuki_lab.walks import random_pair


logger = logging.getLogger(__name__)

COLUMNS = [
    "pair",
    "provenance",
    "lambda2",
    "lambda_min",
    "spectral_gap",
    "converged",
    "multiplicity",
    "sweep_expansion",
]

# (graph, expected lambda_2, expected lambda_min)
TOY_GRAPHS: list[tuple[CayleyGraph, float, float]] = [
    (cyclic_cayley(5, [1, 2, 3, 4]), -0.25, -0.25),
    (cyclic_cayley(8, [1, -1, 2, -2]), math.cos(math.pi / 4) / 2, -0.5),
]


def _toy_criteria(ctx: RunContext, report: ExperimentReport) -> None:
    tol = ctx.config.thresholds.oracle_tol
    worst = 0.0
    for graph, lam2, lam_min in TOY_GRAPHS:
        dense = dense_spectrum(graph)
        second = second_eigenvalue(graph, tol=ctx.config.thresholds.eigen_tol, seed=ctx.seed)
        errors = [
            abs(second.lambda2.value - dense[-2]),
            abs(second.lambda_min.value - dense[0]),
            abs(dense[-2] - lam2),
            abs(dense[0] - lam_min),
        ]
        worst = max(worst, *errors)
        logger.debug("%s: lambda2=%.12f dense=%.12f", graph.label, second.lambda2.value, dense[-2])
    report.criteria.append(
        Criterion.check(
            "toy-oracles",
            worst <= tol,
            "K5 (max modulus 0.25) and Z/8 with S = {+-1, +-2} (lambda2 = cos(pi/4)/2) match dense solves",
            measured=worst,
            bound=tol,
        )
    )


@register(ExperimentName.SPECTRAL)
def run_spectral(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    fld = field_new(cfg.q.bit_length() - 1)
    index = enumerate_group(fld)
    margin = cfg.thresholds.spectral_margin
    pairs = cfg.budgets.spectral_pairs
    report = ctx.new_report(COLUMNS, margin=margin)

    _toy_criteria(ctx, report)

    good = measured = attempts = 0
    multiplicity = None
    while measured < pairs and attempts < 2 * pairs + 10:
        pair = random_pair(fld, ctx.seed, "spectral", attempts)
        attempts += 1
        if generates(pair.a, pair.b, index=index).status is not GenerationStatus.GENERATES:
            continue
        graph = build_cayley(index, pair)
        first = measured == 0
        dump = ctx.artifact(f"lambda2-q{fld.q}-pair0.f64", "eigenvector") if first and cfg.output.dump_vectors else None
        result = spectral_report(
            graph,
            tol=cfg.thresholds.eigen_tol,
            max_iter=cfg.budgets.max_iter,
            seed=ctx.seed + measured,
            probe_budget=cfg.budgets.probe_budget if first else 0,
            probe_tol=cfg.thresholds.multiplicity_tol,
            dump_to=dump,
        )
        if first:
            multiplicity = result
        good += result.converged and result.lambda2 < 1 - margin
        report.rows.append(
            {
                "pair": measured,
                "provenance": pair.provenance,
                "lambda2": result.lambda2,
                "lambda_min": result.lambda_min,
                "spectral_gap": result.spectral_gap,
                "converged": result.converged,
                "multiplicity": result.multiplicity if first else None,
                "sweep_expansion": result.sweep_expansion,
            }
        )
        measured += 1

    need = math.ceil(cfg.thresholds.spectral_pass * pairs)
    report.criteria.append(
        Criterion.check(
            "spectral-gap",
            measured == pairs and good >= need,
            f"{good}/{measured} generating pairs have converged lambda2 < 1 - {margin} (need {need})",
            measured=good,
            bound=need,
        )
    )
    if report.rows:
        report.criteria.append(
            Criterion.report(
                "worst-lambda2",
                "largest nontrivial eigenvalue over the sampled pairs",
                measured=max(r["lambda2"] for r in report.rows),
                bound=1 - margin,
            )
        )
    if multiplicity is not None:
        detail = f"eigenvalues within {cfg.thresholds.multiplicity_tol} of lambda2 for the first pair"
        if multiplicity.multiplicity_exhausted:
            detail += f" (probe budget {cfg.budgets.probe_budget} exhausted; count is a lower bound)"
        report.criteria.append(
            Criterion.report(
                "lambda2-multiplicity",
                detail,
                measured=multiplicity.multiplicity,
                bound=cfg.thresholds.multiplicity_floor,
                shape="c q^(3/2)",
            )
        )
    logger.info("spectral q=%d: %d/%d pairs with a gap", fld.q, good, measured)
    return report
