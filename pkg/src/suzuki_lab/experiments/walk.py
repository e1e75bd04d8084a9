"""walk: the Cauchy-Schwarz step, sigma estimators and exact/sampled agreement."""

from __future__ import annotations

import logging

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import enumerate_group, subfield_subgroup, t_element
from suzuki_lab.walks import (
    GeneratorPair,
    agreement,
    algebraic_case_bound,
    borel_target,
    cauchy_schwarz_check,
    exact_walk,
    random_pair,
    sample_walk,
    sigma1_estimate,
    sigma2_estimate,
    subfield_target,
    subgroup_mass,
    symmetry_defect,
    total_variation,
)


logger = logging.getLogger(__name__)

COLUMNS = ["pair", "target", "n", "m", "lhs", "rhs", "holds"]


@register(ExperimentName.WALK)
def run_walk(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    budgets = cfg.budgets
    fld = field_new(cfg.q.bit_length() - 1)
    index = enumerate_group(fld)
    targets = [borel_target(fld), subfield_target(subfield_subgroup(fld, field_new(cfg.experiment.q0.bit_length() - 1)))]
    report = ctx.new_report(COLUMNS)

    failures = checks = 0
    for i in range(budgets.walk_pairs):
        pair = random_pair(fld, ctx.seed, "walk", i)
        for H in targets:
            for n in budgets.walk_steps:
                for m in budgets.walk_offsets:
                    check = cauchy_schwarz_check(pair, H, n, m, index)
                    checks += 1
                    failures += not check.holds
                    report.rows.append(
                        {"pair": i, "target": H.tag, "n": n, "m": m, "lhs": check.lhs, "rhs": check.rhs, "holds": check.holds}
                    )
    report.criteria.append(
        Criterion.check(
            "cauchy-schwarz",
            failures == 0,
            f"mu^(n+m)(H) <= mu^(2n)(H)^(1/2) in {checks - failures}/{checks} exact checks",
            measured=failures,
            bound=0,
        )
    )

    rng = rng_for(ctx.seed, "walk", "sigma")
    sigma2 = sigma2_estimate(fld, budgets.word_length, budgets.word_samples, budgets.sigma_pairs, rng)
    report.criteria.append(
        Criterion.check(
            "sigma2-hits",
            sigma2.verified_hits == sigma2.hits,
            f"all {sigma2.hits} sigma2 hits satisfy w(a, b)^4 = 1",
            measured=sigma2.estimate,
            bound=sigma2.bound_shape,
            shape="q^(-1/2) log q",
        )
    )
    T = t_element(fld)
    at_t = sigma2_estimate(fld, budgets.word_length, budgets.word_samples, 1, rng, pair=GeneratorPair(T, T, "T,T"))
    report.criteria.append(
        Criterion.check(
            "sigma2-at-T",
            at_t.hits == at_t.samples,
            f"a = b = T: {at_t.hits}/{at_t.samples} words have characteristic polynomial x^4 + 1",
            measured=at_t.estimate,
            bound=1.0,
        )
    )
    sigma1 = sigma1_estimate(fld, budgets.word_length, budgets.word_samples, budgets.sigma_pairs, rng)
    report.criteria.append(
        Criterion.report(
            "sigma1",
            "P(some c_i(w(a, b)) lies in a proper subfield, nonzero)",
            measured=sigma1.estimate,
            bound=sigma1.bound_shape,
            shape="q^(-1/6) log q",
        )
    )

    pair = random_pair(fld, ctx.seed, "walk", 0)
    n = max(budgets.walk_steps)
    exact = exact_walk(pair, index, n)
    sampled = sample_walk(pair, n, budgets.trials, ctx.seed)
    z = max(abs(agreement(subgroup_mass(exact, H), subgroup_mass(sampled, H))) for H in targets)
    report.criteria.append(
        Criterion.check(
            "exact-sampled-agreement",
            z <= cfg.thresholds.z_limit,
            f"sampled masses at n = {n} over {budgets.trials} walks agree with exact convolution",
            measured=z,
            bound=cfg.thresholds.z_limit,
        )
    )
    defect = symmetry_defect(exact)
    report.criteria.append(
        Criterion.check("walk-symmetry", defect <= 1e-12, "mu^(n)(g) = mu^(n)(g^-1)", measured=defect, bound=1e-12)
    )
    report.criteria.append(
        Criterion.report("total-variation", f"distance to uniform after {n} steps", measured=total_variation(exact))
    )
    report.criteria.append(
        Criterion.report(
            "algebraic-case-bound",
            f"solvable-subgroup estimate at n0 = {n}",
            measured=algebraic_case_bound(n),
            shape="n0^8 (sqrt 3 / 2)^(2 n0)",
        )
    )
    logger.info("walk q=%d: %d Cauchy-Schwarz checks, %d failures", fld.q, checks, failures)
    return report
