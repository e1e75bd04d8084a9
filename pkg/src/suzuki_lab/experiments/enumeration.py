"""enumerate: order formulas, closure, factorization and the embedded Sz(q0)."""

from __future__ import annotations

import logging

import numpy as np

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.group_cache import load_index, save_index
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.seeding import rng_for
from suzuki_lab.suzuki import (
    NOT_MEMBER,
    GroupIndex,
    Matrix4,
    assemble_batch,
    borel_order,
    enumerate_group,
    factorize,
    group_order,
    matmul_batch,
    params_from_rank,
    random_params,
    subfield_subgroup,
    t_matrix,
)


logger = logging.getLogger(__name__)

COLUMNS = ["check", "checked", "failures"]


def _symplectic_failures(index: GroupIndex) -> int:
    M = index.matrices
    T = np.asarray(t_matrix(index.field).entries, dtype=np.int64).reshape(4, 4)
    lhs = matmul_batch(index.field, matmul_batch(index.field, M.swapaxes(-1, -2), T), M)
    return int((~np.all(lhs == T, axis=(-2, -1))).sum())


def _roundtrip_failures(index: GroupIndex) -> int:
    """factorize(assemble(p)) == p over every enumerated element."""
    fld = index.field
    return sum(
        1
        for rank, M in enumerate(index.matrices)
        if factorize(Matrix4(fld, tuple(int(v) for v in M.ravel()))) != params_from_rank(fld, rank)
    )


def _product_failures(ctx: RunContext, index: GroupIndex, samples: int) -> int:
    """Random products must factorize, and to the parameters the index assigns them."""
    fld = index.field
    rng = rng_for(ctx.seed, "enumerate", "products")
    A = assemble_batch(random_params(fld, rng, samples))
    B = assemble_batch(random_params(fld, rng, samples))
    C = matmul_batch(fld, A, B)
    ranks = index.lookup(C) if index.has_matrices else None
    failures = 0
    for i, M in enumerate(C):
        p = factorize(Matrix4(fld, tuple(int(v) for v in M.ravel())))
        if p is NOT_MEMBER or (ranks is not None and p != params_from_rank(fld, int(ranks[i]))):
            failures += 1
    return failures


def _subgroup_checks(ctx: RunContext, m0: int) -> tuple[int, int, int]:
    """(distinct elements, expected order, closure failures) of the embedded Sz(q0)."""
    fld = field_new(ctx.config.q.bit_length() - 1)
    sub = subfield_subgroup(fld, field_new(m0))
    elements = list(sub.elements())
    distinct = len({g.matrix.entries for g in elements})
    rng = rng_for(ctx.seed, "enumerate", "subgroup")
    failures = 0
    for _ in range(ctx.config.budgets.subgroup_pairs):
        x, y = sub.random_element(rng), sub.random_element(rng)
        if (x * y) not in sub:
            failures += 1
    return distinct, sub.order, failures


@register(ExperimentName.ENUMERATE)
def run_enumerate(ctx: RunContext) -> ExperimentReport:
    cfg = ctx.config
    q = cfg.q
    fld = field_new(q.bit_length() - 1)
    index = enumerate_group(fld)
    report = ctx.new_report(COLUMNS, group_order=group_order(q), borel_order=borel_order(q))

    def row(check: str, checked: int, failures: int) -> None:
        report.rows.append({"check": check, "checked": checked, "failures": failures})

    samples = cfg.budgets.samples
    if index.has_matrices:
        count = len(index.matrices)
        borel = int((index.matrices[:, 0, 3] == 0).sum())
        report.criteria.append(
            Criterion.check(
                "group-order",
                count == group_order(q) and borel == borel_order(q),
                f"|Sz({q})| = {count}, |B| = {borel}; no parametrisation collisions",
                measured=count,
                bound=group_order(q),
                shape="q^2 (q^2 + 1)(q - 1)",
            )
        )
        symp = _symplectic_failures(index)
        roundtrip = _roundtrip_failures(index)
        row("symplectic", count, symp)
        row("factorize-assemble", count, roundtrip)
    else:
        symp = roundtrip = 0
        report.criteria.append(
            Criterion.report(
                "group-order",
                f"Sz({q}) indexed by parameters only; order {group_order(q)} from the formula",
                measured=index.size,
            )
        )
    products = _product_failures(ctx, index, samples)
    row("random-products", samples, products)
    report.criteria.append(
        Criterion.check(
            "closure-factorization",
            symp == 0 and roundtrip == 0 and products == 0,
            f"{samples} random products factorize to canonical parameters",
            measured=symp + roundtrip + products,
            bound=0,
        )
    )

    m0 = cfg.experiment.q0.bit_length() - 1
    if (q.bit_length() - 1) % m0 == 0 and m0 < q.bit_length() - 1:
        distinct, order, closure = _subgroup_checks(ctx, m0)
        row(f"Sz({cfg.experiment.q0})-closure", cfg.budgets.subgroup_pairs, closure)
        report.criteria.append(
            Criterion.check(
                "subfield-subgroup",
                distinct == order and closure == 0,
                f"embedded Sz({cfg.experiment.q0}) has {distinct} elements (expected {order})",
                measured=distinct,
                bound=order,
            )
        )

    if cfg.output.cache_index:
        path = ctx.artifact(f"sz{q}.idx", "index-cache")
        if path is not None:
            save_index(index, path)
            reloaded = load_index(path, with_matrices=False)
            report.criteria.append(
                Criterion.check(
                    "index-cache",
                    reloaded.size == index.size and reloaded.field == index.field,
                    f"binary index written to {path.name} and verified on reload",
                )
            )
    logger.info("enumerate q=%d: %d criteria", q, len(report.criteria))
    return report
