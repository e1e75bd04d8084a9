"""field-check: exhaustive field identities and the subfield census."""

from __future__ import annotations

import logging

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import check_field_laws, field_new, subfield_census, subfield_union
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport


logger = logging.getLogger(__name__)

COLUMNS = [
    "m",
    "q",
    "theta",
    "theta_failures",
    "order_failures",
    "table_failures",
    "subfield_union",
    "census_bound",
]


@register(ExperimentName.FIELD_CHECK)
def run_field_check(ctx: RunContext) -> ExperimentReport:
    report = ctx.new_report(COLUMNS)
    failures = 0
    census_ok = True
    for m in ctx.config.budgets.field_degrees:
        fld = field_new(m)
        laws = check_field_laws(fld)
        census = subfield_census(m)
        if fld.q <= 1 << 16 and len(subfield_union(fld)) != census.union_size:
            census_ok = False
        failures += laws.failures
        logger.info("%s: %d law failures", fld, laws.failures)
        report.rows.append(
            {
                "m": m,
                "q": fld.q,
                "theta": fld.theta_exponent,
                "theta_failures": laws.theta_failures,
                "order_failures": laws.order_failures,
                "table_failures": laws.table_failures,
                "subfield_union": census.union_size,
                "census_bound": census.bound,
            }
        )
    degrees = ", ".join(str(m) for m in ctx.config.budgets.field_degrees)
    report.criteria.append(
        Criterion.check(
            "field-laws",
            failures == 0,
            f"(x^theta)^theta = x^2 and x^(q-1) = 1 exhaustively for m in {degrees}",
            measured=failures,
            bound=0,
        )
    )
    report.criteria.append(
        Criterion.check(
            "subfield-census",
            census_ok,
            "union of proper subfields by enumeration equals the divisor count",
        )
    )
    report.criteria.append(
        Criterion.report(
            "subfield-union-size",
            "largest |union of proper subfields| against 2 q^(1/3)",
            measured=max(r["subfield_union"] for r in report.rows),
            bound=max(r["census_bound"] for r in report.rows),
            shape="2 q^(1/3)",
        )
    )
    return report
