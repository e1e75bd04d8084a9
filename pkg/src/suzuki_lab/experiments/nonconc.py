"""nonconc: exact walk mass on B and on a conjugate of the embedded Sz(q0)."""

from __future__ import annotations

import logging
import math

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import GenerationStatus, enumerate_group, generates, random_element, subfield_subgroup
from suzuki_lab.walks import (
    borel_target,
    mass_trajectory,
    n_schedule,
    nonconcentration_report,
    random_pair,
    subfield_target,
)


logger = logging.getLogger(__name__)

COLUMNS = ["pair", "target", "n", "mass", "stationary", "deviation", "threshold", "flagged"]


@register(ExperimentName.NONCONC)
def run_nonconc(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    fld = field_new(cfg.q.bit_length() - 1)
    index = enumerate_group(fld)
    sub = subfield_subgroup(fld, field_new(cfg.experiment.q0.bit_length() - 1))
    borel = borel_target(fld)
    subfield = subfield_target(sub)
    n = cfg.budgets.nonconc_steps
    tol = cfg.thresholds.mass_tolerance
    threshold = fld.q**-cfg.thresholds.delta0
    report = ctx.new_report(COLUMNS, steps=n, threshold=threshold)

    good = measured = attempts = 0
    worst = 0.0
    first_pair = None
    while measured < cfg.budgets.pairs and attempts < 2 * cfg.budgets.pairs + 10:
        pair = random_pair(fld, ctx.seed, "nonconc", attempts)
        attempts += 1
        if generates(pair.a, pair.b, index=index).status is not GenerationStatus.GENERATES:
            continue
        first_pair = first_pair or pair
        x = random_element(fld, rng_for(ctx.seed, "nonconc", "conjugator", measured))
        targets = [borel, subfield.conjugated(x)]
        rows = nonconcentration_report(pair, [n], targets, delta0=cfg.thresholds.delta0, index=index)
        ok = True
        for row in rows:
            deviation = abs(row.mass - (row.stationary or 0.0))
            worst = max(worst, row.mass)
            ok = ok and deviation <= tol and not row.flagged
            report.rows.append(
                {
                    "pair": row.pair,
                    "target": row.target,
                    "n": row.n,
                    "mass": row.mass,
                    "stationary": row.stationary,
                    "deviation": deviation,
                    "threshold": row.threshold,
                    "flagged": row.flagged,
                }
            )
        good += ok
        measured += 1

    need = math.ceil(cfg.thresholds.nonconc_pass * cfg.budgets.pairs)
    report.criteria.append(
        Criterion.check(
            "non-concentration",
            measured == cfg.budgets.pairs and good >= need,
            f"{good}/{measured} generating pairs have mu^({n})(H) within {tol} of |H|/|G| "
            f"and below q^-{cfg.thresholds.delta0} for H in (B, Sz({sub.sub.q})^x) (need {need})",
            measured=good,
            bound=need,
        )
    )
    report.criteria.append(
        Criterion.report(
            "max-subgroup-mass",
            "largest measured subgroup mass",
            measured=worst,
            bound=threshold,
            shape="q^-delta",
        )
    )
    if first_pair is not None:
        schedule = n_schedule(fld.q, cfg.thresholds.schedule_constants)
        trajectory = mass_trajectory(first_pair, borel, schedule, index)
        report.facts["borel_trajectory"] = [[k, mass] for k, mass in trajectory]
        report.criteria.append(
            Criterion.report(
                "borel-mass-schedule",
                f"mu^(n)(B) at n = C log q for C in {cfg.thresholds.schedule_constants}",
                measured=trajectory[-1][1],
                bound=threshold,
                shape="q^-delta",
            )
        )
    logger.info("nonconc q=%d: %d/%d pairs pass", fld.q, good, measured)
    return report
