"""wordlaw: no short word is a law on Sz(q) minus B."""

from __future__ import annotations

import logging

from suzuki_lab.experiments.registry import RunContext, register
from suzuki_lab.field import field_new
from suzuki_lab.models import Criterion, ExperimentName, ExperimentReport
from suzuki_lab.polycount import WitnessStatus, word_law_witness
from suzuki_lab.seeding import rng_for
from suzuki_lab.words import ball


logger = logging.getLogger(__name__)

COLUMNS = ["word", "length", "status", "attempts_used"]


@register(ExperimentName.WORDLAW)
def run_wordlaw(ctx: RunContext) -> ExperimentReport:
    """One word per {w, w^-1} class; a witness for w is one for its inverse."""
    cfg = ctx.config
    fld = field_new(cfg.q.bit_length() - 1)
    L = cfg.budgets.law_length
    attempts = cfg.budgets.law_attempts
    words = [w for w in ball(L) if not w.is_identity() and w.letters <= w.inverse().letters]
    report = ctx.new_report(COLUMNS, law_length=L, words=len(words))

    exhausted = []
    most = 0
    for w in words:
        witness = word_law_witness(w, fld, attempts, rng_for(ctx.seed, "wordlaw", w.packed, len(w)))
        most = max(most, witness.attempts_used)
        if witness.status is WitnessStatus.EXHAUSTED:
            exhausted.append(witness.word)
            logger.warning("no witness for %s in %d attempts over Sz(%d)", witness.word, attempts, fld.q)
        report.rows.append(
            {"word": witness.word, "length": len(w), "status": witness.status, "attempts_used": witness.attempts_used}
        )
    report.facts["inconclusive"] = exhausted
    report.criteria.append(
        Criterion.check(
            "word-laws",
            not exhausted,
            f"{len(words) - len(exhausted)}/{len(words)} words of length <= {L} (up to inversion) "
            f"have a witness in Sz({fld.q}) minus B within {attempts} attempts",
            measured=len(exhausted),
            bound=0,
        )
    )
    report.criteria.append(
        Criterion.report("witness-attempts", "most attempts any word needed", measured=most, bound=attempts)
    )
    logger.info("wordlaw q=%d: %d words, %d inconclusive", fld.q, len(words), len(exhausted))
    return report
