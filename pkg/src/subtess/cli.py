"""Command line: run jobs, check them against the oracle, run a corpus."""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import presburger as pb
from .bounded import BoundedError, bounded_witness, decide_bounded
from .cmod2 import decide_cmod2
from .dsl import Job, ParseError, parse_job
from .logic import all_vars, eval_qf, prenex_existential
from .oracle import brute_force_eval, presburger_eval
from .presburger import ResourceLimit
from .sigma1 import (
    UnsupportedTheory, check_bounded, check_nonnegligible, decide_sigma1,
    decide_sigma1_constants, sigma1_witness,
)

MAX_SIGMA1_VARIABLES = 5
DEFAULT_ORACLE_BOUND = 6

EXIT_OK, EXIT_PARSE, EXIT_RESOURCE = 0, 2, 3


@dataclass
class Verdict:
    result: str  # "true", "false" or "unsupported-theory"
    witnesses: dict | None = None
    trace: dict = field(default_factory=dict)

    def to_json(self) -> str:
        data = {"result": self.result, "trace": self.trace}
        if self.witnesses is not None:
            data["witnesses"] = self.witnesses
        return json.dumps(data, sort_keys=True, ensure_ascii=False)


def _bool(v: bool) -> str:
    return "true" if v else "false"


def _check_witnesses(job: Job, witnesses: dict):
    names, matrix = prenex_existential(job.sentence)
    L = job.domain()
    for x in names:
        if not L.accepts(witnesses[x]):
            raise AssertionError(f"witness for {x} is not in the domain")
    if not eval_qf(matrix, witnesses):
        raise AssertionError("witnesses do not satisfy the matrix")


def run(job: Job) -> Verdict:
    """Decide a parsed job; ResourceLimit propagates to the caller."""
    theory = job.theory
    if theory == "presburger":
        return Verdict(_bool(pb.decide_sentence(job.sentence, pb.Compiler())), trace={"theory": theory})
    L = job.domain()
    trace = {"theory": theory, "domain_states": L.state_count}
    if theory == "cmod2":
        return Verdict(_bool(decide_cmod2(job.sentence, job.language, job.alphabet)), trace=trace)
    if theory == "bounded":
        shape = check_bounded(L)
        if job.basis is None and not shape.is_bounded:
            return Verdict("unsupported-theory", trace={**trace, "reason": "language is not bounded"})
        basis = job.basis if job.basis is not None else shape.words
        trace["basis"] = list(basis)
        try:
            ok = decide_bounded(job.sentence, L, basis)
        except BoundedError as e:
            return Verdict("unsupported-theory", trace={**trace, "reason": str(e)})
        witnesses = None
        prefix = prenex_existential(job.sentence)
        if ok and prefix is not None and prefix[0]:
            witnesses = bounded_witness(job.sentence, L, basis)
            _check_witnesses(job, witnesses)
        return Verdict(_bool(ok), witnesses, trace)

    # existential theories
    count = len(all_vars(job.sentence))
    if count > MAX_SIGMA1_VARIABLES:
        raise ResourceLimit(f"{count} variables exceed the limit of {MAX_SIGMA1_VARIABLES}")
    shape = check_bounded(L)
    trace["bounded"] = shape.is_bounded
    if shape.is_bounded:
        basis = job.basis if job.basis is not None else shape.words
        trace["basis"] = list(basis)
        try:
            ok = decide_bounded(job.sentence, L, basis)
        except BoundedError as e:
            return Verdict("unsupported-theory", trace={**trace, "reason": str(e)})
        witnesses = bounded_witness(job.sentence, L, basis) if ok else None
    elif theory == "sigma1":
        ok = decide_sigma1(job.sentence, L)
        witnesses = sigma1_witness(job.sentence, L) if ok else None
    else:
        if not check_nonnegligible(L):
            return Verdict("unsupported-theory", trace={**trace, "reason": "unbounded language with a negligible letter"})
        try:
            ok, witnesses = decide_sigma1_constants(job.sentence, L, certificate=True)
        except UnsupportedTheory as e:
            return Verdict("unsupported-theory", trace={**trace, "reason": str(e)})
    if ok:
        _check_witnesses(job, witnesses)
    return Verdict(_bool(ok), witnesses if ok else None, trace)


def oracle(job: Job, max_len: int | None = None):
    """Oracle verdict: "true", "false" or "unknown"."""
    if job.theory == "presburger":
        v = presburger_eval(job.sentence)
    else:
        n = max_len if max_len is not None else (job.oracle_bound or DEFAULT_ORACLE_BOUND)
        v = brute_force_eval(job.sentence, job.language, n, job.alphabet)
    return "unknown" if v is None else _bool(v)


# --- corpus -------------------------------------------------------------------

def check_job(path: str, max_len: int | None = None) -> dict:
    """Run engine and oracle on one job file; never raises."""
    entry = {"job": path}
    try:
        with open(path) as fh:
            job = parse_job(fh.read())
    except (OSError, ParseError) as e:
        entry.update(status="parse-error", error=str(e))
        return entry
    t0 = time.perf_counter()
    try:
        verdict = run(job)
        entry["engine"] = verdict.result
    except ResourceLimit as e:
        entry.update(status="resource-limit", error=str(e))
        return entry
    t1 = time.perf_counter()
    entry["oracle"] = oracle(job, max_len) if verdict.result != "unsupported-theory" else "unknown"
    t2 = time.perf_counter()
    entry["engine_seconds"] = round(t1 - t0, 3)
    entry["oracle_seconds"] = round(t2 - t1, 3)
    entry["expect"] = job.expect
    problems = []
    if entry["oracle"] != "unknown" and entry["oracle"] != verdict.result:
        problems.append("oracle disagrees")
    if job.expect is not None and job.expect != verdict.result:
        problems.append("expectation not met")
    entry["status"] = "disagree" if problems else "ok"
    if problems:
        entry["problems"] = problems
    return entry


def cross_validate(paths, max_len: int | None = None, workers: int = 1) -> dict:
    paths = list(paths)
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(check_job, paths, [max_len] * len(paths)))
    else:
        entries = [check_job(p, max_len) for p in paths]
    failures = sum(1 for e in entries if e["status"] != "ok")
    return {"jobs": entries, "total": len(entries), "failures": failures}


def _timing_table(report: dict) -> str:
    lines = [f"{'job':<48} {'engine':<20} {'oracle':<8} {'t_eng':>7} {'t_orc':>7}  status"]
    for e in report["jobs"]:
        lines.append(
            f"{e['job'][-48:]:<48} {e.get('engine', '-'):<20} {e.get('oracle', '-'):<8} "
            f"{e.get('engine_seconds', 0):>7.2f} {e.get('oracle_seconds', 0):>7.2f}  {e['status']}"
        )
    lines.append(f"{report['total']} jobs, {report['failures']} failures")
    return "\n".join(lines)


# --- entry point ----------------------------------------------------------------

def _load(path):
    with open(path) as fh:
        return parse_job(fh.read())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="subtess", description="Decision procedures for the subword order.")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="decide a job file and print the verdict as JSON")
    p_run.add_argument("job")
    p_run.add_argument("--basis", help="comma-separated block words for the bounded theory")
    p_orc = sub.add_parser("oracle", help="brute-force verdict on a finite slice")
    p_orc.add_argument("job")
    p_orc.add_argument("--max-len", type=int, default=None)
    p_cor = sub.add_parser("corpus", help="cross-validate engine and oracle on job files")
    p_cor.add_argument("jobs", nargs="*")
    p_cor.add_argument("--json", dest="json_out", help="write the report here")
    p_cor.add_argument("--max-len", type=int, default=None)
    p_cor.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    if args.command == "corpus":
        report = cross_validate(args.jobs, args.max_len, args.workers)
        print(_timing_table(report))
        if args.json_out:
            with open(args.json_out, "w") as fh:
                json.dump(report, fh, indent=2, sort_keys=True, ensure_ascii=False)
        return EXIT_OK if report["failures"] == 0 else 1

    try:
        job = _load(args.job)
    except (OSError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if args.command == "oracle":
        print(json.dumps({"result": oracle(job, args.max_len)}, sort_keys=True))
        return EXIT_OK
    if args.basis:
        job.basis = tuple(w.strip() for w in args.basis.split(",") if w.strip())
        if any(c not in job.alphabet for w in job.basis for c in w):
            print("error: basis uses letters outside the alphabet", file=sys.stderr)
            return EXIT_PARSE
    try:
        verdict = run(job)
    except ResourceLimit as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    print(verdict.to_json())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
