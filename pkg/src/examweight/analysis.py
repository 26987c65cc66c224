"""Question-level diagnostics: extreme-weight identification, per-question
score-vs-ability distribution tables, and degenerate/duplicate detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gradebook as gb
from .errors import DataError
from .experiment import EvaluationReport

ALL_CORRECT = "all_correct"
ALL_ZERO = "all_zero"


@dataclass(frozen=True)
class QuestionDiagnostic:
    question: str
    weight_by_solver: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    # (student id, fractional score, ability), sorted by ability ascending
    distribution: tuple[tuple[str, float, float], ...] = ()


def extreme_questions(
    report: EvaluationReport,
    solver: str,
    k: int = 3,
    scale: str = gb.ACTUAL_SCALE,
    exclusion: str = gb.INCLUDE_EXAM,
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """The k largest- and k smallest-weight questions for one solver.

    Questions are ranked by averaged weight with ties broken by question id;
    a k beyond the question count truncates rather than failing.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    rec = report.get(solver, scale, exclusion)
    weights = rec.averaged_weights.question_weights
    pairs = [(q, float(w)) for q, w in zip(report.question_ids, weights)]
    top = sorted(pairs, key=lambda p: (-p[1], p[0]))[:k]
    bottom = sorted(pairs, key=lambda p: (p[1], p[0]))[:k]
    return top, bottom


def distribution_table(
    g: gb.Gradebook,
    exam: str,
    question: str,
    ability: gb.AbilityVector,
) -> QuestionDiagnostic:
    """Per-student (score, ability) rows for one question, weakest student
    first.  Scores keep full stored precision; rounding of abilities happens
    only at the serialization boundary."""
    ids = g.question_ids(exam)
    if question not in ids:
        raise DataError(f"unknown question {question!r} in exam {exam!r}")
    col = g.exams[exam][:, ids.index(question)]
    order = np.argsort(ability.values, kind="stable")
    rows = tuple(
        (g.students[i], float(col[i]), float(ability.values[i])) for i in order
    )
    return QuestionDiagnostic(
        question=question, flags=_column_flags(col), distribution=rows
    )


def _column_flags(col: np.ndarray) -> tuple[str, ...]:
    flags = []
    if np.all(col == 1.0):
        flags.append(ALL_CORRECT)
    if np.all(col == 0.0):
        flags.append(ALL_ZERO)
    return tuple(flags)


def degenerate_questions(g: gb.Gradebook, exam: str) -> list[QuestionDiagnostic]:
    """Flag structurally uninformative questions in one exam.

    Flags: all_correct / all_zero columns, exact duplicate columns (later
    duplicates point at the first column of the group), and top_only:k for
    k in {1, 2} when exactly the k highest-ability students scored 1 and
    everyone else 0.
    """
    ids = g.question_ids(exam)
    s = g.exams[exam]
    abil = gb.ability(g, exam, gb.ACTUAL_SCALE, gb.INCLUDE_EXAM).values
    ranked = np.argsort(-abil, kind="stable")  # strongest first

    first_seen: dict[bytes, str] = {}
    diagnostics = []
    for j, qid in enumerate(ids):
        col = s[:, j]
        flags = list(_column_flags(col))
        key = col.tobytes()  # duplicates are exact, bitwise on stored fractions
        if key in first_seen:
            flags.append(f"duplicate_of:{first_seen[key]}")
        else:
            first_seen[key] = qid
        for k in (1, 2):
            top = set(ranked[:k])
            correct = set(np.flatnonzero(col == 1.0))
            if correct == top and np.all(col[sorted(set(range(len(col))) - top)] == 0.0):
                flags.append(f"top_only:{k}")
        if flags:
            diagnostics.append(QuestionDiagnostic(question=qid, flags=tuple(flags)))
    return diagnostics


def attach_weights(
    diag: QuestionDiagnostic, report: EvaluationReport, scale: str = gb.ACTUAL_SCALE,
    exclusion: str = gb.INCLUDE_EXAM,
) -> QuestionDiagnostic:
    """Return a copy of the diagnostic with averaged weights per solver filled
    in from an evaluation report."""
    if diag.question not in report.question_ids:
        raise DataError(f"question {diag.question!r} not in report")
    j = report.question_ids.index(diag.question)
    weights = {}
    for rec in report.records:
        if rec.scale == scale and rec.exclusion == exclusion:
            weights[rec.approach] = float(rec.averaged_weights.question_weights[j])
    return QuestionDiagnostic(
        question=diag.question,
        weight_by_solver=weights,
        flags=diag.flags,
        distribution=diag.distribution,
    )
