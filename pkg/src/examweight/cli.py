"""Command-line surface: fit / evaluate / analyze / generate.

Exit codes: 0 success, 1 data error, 2 solver non-convergence (hard caps
always; soft Huber non-convergence only under --strict or
EXAMWEIGHT_STRICT=1), 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, dataio, experiment
from . import gradebook as gb
from . import solvers, synthetic
from .errors import ConvergenceError, DataError

_SOLVER_ALIASES = {
    "ols": solvers.OLS_CLOSED_FORM,
    "linear": solvers.LINEAR_INTERCEPT,
    "huber": solvers.HUBER,
    "nnls": solvers.NNLS,
}

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_NO_CONVERGENCE = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 64 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _add_gradebook_args(p: _Parser) -> None:
    p.add_argument("--scores", required=True, help="scores CSV for the exam")
    p.add_argument("--questions", required=True, help="questions CSV for the exam")
    p.add_argument("--components", required=True, help="course components CSV")
    p.add_argument("--exam", default="final", help="exam id (default: final)")
    p.add_argument(
        "--no-consistency-check", action="store_true",
        help="skip the exam-component vs actual-weight-total check",
    )


def _add_solver_args(p: _Parser) -> None:
    p.add_argument("--epsilon", type=float, default=1.8,
                   help="Huber loss threshold (default 1.8)")
    p.add_argument("--alpha", type=float, default=0.1,
                   help="Huber ridge regularization (default 0.1)")
    p.add_argument("--strict", action="store_true",
                   help="treat solver non-convergence as fatal (exit 2)")


def build_parser() -> _Parser:
    parser = _Parser(prog="examweight",
                     description="Optimal per-question exam weighting")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[], help="fit question weights (LOOCV averaged)")
    _add_gradebook_args(fit)
    _add_solver_args(fit)
    fit.add_argument("--solver", choices=[*_SOLVER_ALIASES, "all"], default="all")
    fit.add_argument("--scale", choices=["actual", "normalized", "both"], default="actual")
    fit.add_argument("--exclude-exam", action="store_true",
                     help="exclude the exam component from the overall score")
    fit.add_argument("--out", help="output CSV path (default: stdout)")

    ev = sub.add_parser("evaluate", help="MAE comparison of all six approaches")
    _add_gradebook_args(ev)
    _add_solver_args(ev)
    ev.add_argument("--scale", choices=["actual", "normalized", "both"], default="both")
    ev.add_argument("--compare-exclusion", action="store_true",
                    help="also evaluate with the exam excluded and report weight deltas")
    ev.add_argument("--format", choices=["csv", "json"], default="csv")
    ev.add_argument("--out", help="output path (default: stdout table)")

    an = sub.add_parser("analyze", help="question diagnostics")
    _add_gradebook_args(an)
    _add_solver_args(an)
    group = an.add_mutually_exclusive_group(required=True)
    group.add_argument("--question", help="distribution table for one question")
    group.add_argument("--extremes", type=int, metavar="K",
                       help="top/bottom K questions by averaged weight")
    group.add_argument("--degenerate", action="store_true",
                       help="flag all-correct / all-zero / duplicate / top-only questions")
    an.add_argument("--solver", choices=list(_SOLVER_ALIASES), default="linear",
                    help="solver whose weights rank the extremes")
    an.add_argument("--scale", choices=["actual", "normalized"], default="actual")
    an.add_argument("--out", help="output CSV path (default: stdout)")

    gen = sub.add_parser("generate", help="write a synthetic gradebook file set")
    gen.add_argument("--students", type=int, default=9)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--mc", type=int, default=30, help="multiple choice count")
    gen.add_argument("--tf", type=int, default=15, help="true/false count")
    gen.add_argument("--analytical", type=int, default=5, help="analytical question count")
    gen.add_argument("--subparts", type=int, default=8, help="total analytical subparts")
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--discrimination", type=float, default=1.0)
    gen.add_argument("--exam", default="final")
    gen.add_argument("--out-dir", default=".", help="directory for the CSV files")
    return parser


def _load(args) -> gb.Gradebook:
    fileset = dataio.GradebookFileSet(
        scores={args.exam: Path(args.scores)},
        questions={args.exam: Path(args.questions)},
        components=Path(args.components),
    )
    return dataio.load_gradebook(fileset, check_consistency=not args.no_consistency_check)


def _config(args) -> solvers.SolverConfig:
    return solvers.SolverConfig(
        huber_epsilon=args.epsilon, huber_regularization=args.alpha
    )


def _is_strict(args) -> bool:
    return getattr(args, "strict", False) or os.environ.get("EXAMWEIGHT_STRICT") == "1"


def _scales(flag: str) -> tuple[str, ...]:
    return ("actual", "normalized") if flag == "both" else (flag,)


def _print_csv(header, rows, out: str | None) -> None:
    import csv as _csv
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    else:
        writer = _csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)


def _warn_unconverged(report: experiment.EvaluationReport, strict: bool) -> None:
    for rec in report.records:
        if rec.unconverged_folds:
            msg = (f"warning: {rec.approach} ({rec.scale}, {rec.exclusion}): "
                   f"folds {list(rec.unconverged_folds)} hit the iteration cap")
            if strict:
                raise ConvergenceError(msg)
            print(msg, file=sys.stderr)


def _cmd_fit(args) -> int:
    book = _load(args)
    cfg = _config(args)
    exclusion = gb.EXCLUDE_EXAM if args.exclude_exam else gb.INCLUDE_EXAM
    approaches = (
        tuple(_SOLVER_ALIASES.values()) if args.solver == "all"
        else (_SOLVER_ALIASES[args.solver],)
    )
    report = experiment.evaluate(
        book, args.exam, cfg, _scales(args.scale), (exclusion,), approaches
    )
    _warn_unconverged(report, _is_strict(args))
    rows = dataio.weight_rows(report)
    _print_csv(["exam", "solver", "scale", "question", "weight"], rows, args.out)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    book = _load(args)
    cfg = _config(args)
    strict = _is_strict(args)
    if args.compare_exclusion:
        comparison = experiment.exclusion_comparison(book, args.exam, cfg, _scales(args.scale))
        _warn_unconverged(comparison.include_report, strict)
        _warn_unconverged(comparison.exclude_report, strict)
        header = ["approach", "scale", "mae_include", "mae_exclude",
                  "question", "weight_delta"]
        rows = []
        for d in comparison.deltas:
            for qid, delta in d.weight_deltas:
                rows.append([d.approach, d.scale, f"{d.mae_include:.4f}",
                             f"{d.mae_exclude:.4f}", qid, repr(delta)])
        _print_csv(header, rows, args.out)
        return EXIT_OK
    report = experiment.evaluate(book, args.exam, cfg, _scales(args.scale))
    _warn_unconverged(report, strict)
    if args.out:
        dataio.write_report(report, args.out, args.format)
    else:
        header, rows = dataio.mae_table(report)
        _print_csv(header, rows, None)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    book = _load(args)
    cfg = _config(args)
    if args.question:
        abil = gb.ability(book, args.exam, args.scale, gb.INCLUDE_EXAM)
        diag = analysis.distribution_table(book, args.exam, args.question, abil)
        rows = [[s, repr(score), f"{a:.2f}"] for s, score, a in diag.distribution]
        _print_csv(["student", "score", "ability"], rows, args.out)
        return EXIT_OK
    if args.degenerate:
        diags = analysis.degenerate_questions(book, args.exam)
        rows = [[d.question, ";".join(d.flags)] for d in diags]
        _print_csv(["question", "flags"], rows, args.out)
        return EXIT_OK
    solver = _SOLVER_ALIASES[args.solver]
    report = experiment.evaluate(
        book, args.exam, cfg, (args.scale,), (gb.INCLUDE_EXAM,),
        approaches=(solver,),
    )
    _warn_unconverged(report, _is_strict(args))
    top, bottom = analysis.extreme_questions(report, solver, args.extremes, args.scale)
    rows = [["top", i + 1, q, repr(w)] for i, (q, w) in enumerate(top)]
    rows += [["bottom", i + 1, q, repr(w)] for i, (q, w) in enumerate(bottom)]
    _print_csv(["position", "rank", "question", "weight"], rows, args.out)
    return EXIT_OK


def _cmd_generate(args) -> int:
    spec = synthetic.SyntheticSpec(
        students=args.students,
        mc_questions=args.mc,
        tf_questions=args.tf,
        analytical_questions=args.analytical,
        analytical_subparts=args.subparts,
        discrimination=args.discrimination,
        noise=args.noise,
        seed=args.seed,
        exam=args.exam,
    )
    book = synthetic.generate_gradebook(spec)
    fileset = dataio.write_gradebook_files(book, args.out_dir)
    print(fileset.scores[spec.exam])
    print(fileset.questions[spec.exam])
    print(fileset.components)
    return EXIT_OK


_COMMANDS = {
    "fit": _cmd_fit,
    "evaluate": _cmd_evaluate,
    "analyze": _cmd_analyze,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
