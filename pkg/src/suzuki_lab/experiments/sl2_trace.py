"""sl2-trace: the SL2(q) comparison track."""

from __future__ import annotations

import logging

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import binary_field
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.sl2 import (
    certify_nonconstant_trace,
    histogram_z_scores,
    psi2_on_sl2_borel,
    random_sl2_pair,
    sl2_enumerate,
    sl2_order,
    sl2_subfield_mass,
    trace_concentration,
    trace_counts,
    trace_histogram_exact,
)
from suzuki_lab.words import parse_word


logger = logging.getLogger(__name__)

COLUMNS = ["word", "trace", "exact_count", "sampled_count", "z"]

HISTOGRAM_WORDS = ("a", "abAB")


@register(ExperimentName.SL2_TRACE)
def run_sl2_trace(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    budgets = cfg.budgets
    fld = binary_field(cfg.q.bit_length() - 1)
    report = ctx.new_report(COLUMNS)

    size = len(sl2_enumerate(fld))
    report.criteria.append(
        Criterion.check(
            "sl2-order",
            size == sl2_order(fld.q),
            f"|SL2({fld.q})| = {size} by enumeration",
            measured=size,
            bound=sl2_order(fld.q),
        )
    )

    worst_z = 0.0
    for text in HISTOGRAM_WORDS:
        w = parse_word(text)
        exact = trace_histogram_exact(fld, w)
        sampled = trace_counts(fld, w, budgets.sl2_samples, ctx.seed)
        z = histogram_z_scores(exact, sampled)
        worst_z = max(worst_z, float(z.max()))
        for x in range(fld.q):
            report.rows.append(
                {
                    "word": text,
                    "trace": x,
                    "exact_count": int(exact[x]),
                    "sampled_count": int(sampled[x]),
                    "z": float(z[x]),
                }
            )
    report.criteria.append(
        Criterion.check(
            "trace-histogram",
            worst_z <= cfg.thresholds.z_limit,
            f"exhaustive trace histograms over SL2({fld.q}) match {budgets.sl2_samples} samples per bin",
            measured=worst_z,
            bound=cfg.thresholds.z_limit,
        )
    )

    big = binary_field(budgets.sl2_q.bit_length() - 1)
    commutator = parse_word("abAB")
    conc = trace_concentration(big, commutator, budgets.sl2_samples, ctx.seed)
    report.criteria.append(
        Criterion.report(
            "commutator-trace-mass",
            f"max point mass of tr [a, b] over SL2({big.q}) at trace {conc.argmax}",
            measured=conc.max_mass,
            bound=cfg.thresholds.trace_constant / big.q,
            shape="q^(-1+eps)",
        )
    )
    nonconstant = certify_nonconstant_trace(commutator, big, ctx.seed)
    report.criteria.append(
        Criterion.check(
            "nonconstant-trace",
            nonconstant.found,
            f"two pairs give distinct traces {nonconstant.traces} of [a, b] over SL2({big.q})",
        )
    )

    borel = psi2_on_sl2_borel(fld, budgets.tuples, ctx.seed)
    report.criteria.append(
        Criterion.check(
            "sl2-borel-solvable",
            borel.passed,
            f"psi_2 is the identity on {borel.samples - borel.failures}/{borel.samples} upper-triangular 4-tuples",
            measured=borel.failures,
            bound=0,
        )
    )

    m0 = cfg.experiment.q0.bit_length() - 1
    if big.m % m0 == 0:
        pair = random_sl2_pair(big, ctx.seed, "sl2-trace")
        mass = sl2_subfield_mass(big, m0, pair, budgets.sl2_steps, budgets.trials, ctx.seed)
        report.criteria.append(
            Criterion.report(
                "subfield-trace-mass",
                f"walk mass after {mass.n} steps on traces in proper subfields of GF({big.q}) "
                f"(GF({mass.q0}) alone: {mass.mass:.4g})",
                measured=mass.union_mass,
                bound=mass.heuristic,
                shape="|union| / q",
            )
        )
    logger.info("sl2-trace q=%d: max z %.2f", fld.q, worst_z)
    return report
