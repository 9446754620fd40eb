"""Batch command-line surface.

Subcommands tie the modules together and emit human-readable reports or,
with --json, a machine-readable run report with a stable field order
(identical inputs give byte-identical JSON apart from the timing field).

Exit codes: 0 success / witness found; 1 definitive negative; 2
precondition failed (e.g. not a polymatroid); 3 budget exhausted; 64
usage or parse error; 65 variable ground too large.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from entroflow import entropy as ent
from entroflow import network as net
from entroflow.codes import (
    check_admissible,
    code_from_json,
    code_to_json,
    exhaustive_search,
)
from entroflow.entropy import EntropyVector, JointDistribution
from entroflow.gadgets import (
    adhere,
    build_incremental,
    build_secure,
    compose_adhered_code,
    incremental_code,
    otp_code,
    quasi_uniform_library,
    verify_contract,
)
from entroflow.lp import (
    Claim,
    GroundTooLargeError,
    ShannonSolver,
    build_shannon_lp,
    certificate_to_json,
    verify_proof_chain,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64
EXIT_CAPACITY = 65

_VERIFY_ALIASES = {
    "prop1": "key-forcing",
    "thm1": "incremental-forcing",
    "thm2": "uniform-witness",
    "thm4-demo": "adhesion-demo",
}


class _Report:
    """Accumulates verdicts; rendered as text lines or one JSON object."""

    def __init__(self, command: str):
        self.command = command
        self.inputs: dict[str, str] = {}
        self.verdicts: list[dict] = []
        self.certificates: list = []
        self.started = time.time()

    def digest(self, name: str, text: str) -> None:
        self.inputs[name] = hashlib.sha256(text.encode()).hexdigest()

    def add(self, name: str, passed: Optional[bool], detail: str) -> None:
        self.verdicts.append({"name": name, "pass": passed, "detail": detail})

    def render(self, as_json: bool) -> str:
        if as_json:
            doc = {
                "command": self.command,
                "inputs": self.inputs,
                "verdicts": self.verdicts,
                "certificates": self.certificates,
                "timing": {"seconds": round(time.time() - self.started, 6)},
            }
            return json.dumps(doc, indent=2)
        lines = []
        for v in self.verdicts:
            mark = "PASS" if v["pass"] else ("FAIL" if v["pass"] is not None else "info")
            lines.append(f"{mark} {v['name']}: {v['detail']}")
        return "\n".join(lines)


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _budget(args, default: int) -> int:
    if getattr(args, "budget", None):
        return args.budget
    env = os.environ.get("ENTROFLOW_BUDGET")
    return int(env) if env else default


def _emit(report: _Report, args, code: int) -> int:
    print(report.render(args.json))
    return code


def cmd_check_entropic(args) -> int:
    report = _Report("check-entropic")
    try:
        text = _read(args.h_file)
        h = EntropyVector.from_json(text)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.digest("h", text)
    poly = ent.is_polymatroid(h, args.tol)
    if not poly:
        report.add("polymatroid", False, poly.violations[0])
        return _emit(report, args, EXIT_PRECONDITION)
    report.add("polymatroid", True, "all Shannon axioms hold")
    result = ent.entropic_search(
        h, max_support=args.max_support, tol=args.tol, budget=_budget(args, 200_000)
    )
    if result.status == "found":
        report.add("witness", True, f"found after {result.candidates_tried} candidates")
        report.certificates.append(json.loads(result.witness.to_json()))
        return _emit(report, args, EXIT_OK)
    if result.status == "budget-exceeded":
        report.add("witness", None, f"budget exhausted after {result.candidates_tried}")
        return _emit(report, args, EXIT_BUDGET)
    report.add("witness", False, result.detail)
    return _emit(report, args, EXIT_NEGATIVE)


def cmd_lp_bound(args) -> int:
    report = _Report("lp-bound")
    try:
        text = _read(args.problem_file)
        problem = net.parse(text)
    except (OSError, net.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.digest("problem", text)
    variables = args.subnetwork.split(",") if args.subnetwork else None
    try:
        lp = build_shannon_lp(problem, variables=variables, reduce=not args.no_reduce)
    except GroundTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    solver = ShannonSolver(lp)
    if args.dump_lp:
        from entroflow.lp import export_text

        print(export_text(lp))
    if args.verify_chain:
        try:
            chain_text = _read(args.verify_chain)
            doc = json.loads(chain_text)
            claims = [
                Claim.of(
                    entry.get("name", entry["claim"]),
                    entry["claim"],
                    entry["relation"],
                    entry["value"],
                )
                for entry in doc
            ]
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        report.digest("chain", chain_text)
        chain = verify_proof_chain(solver, claims)
        for v in chain.verdicts:
            report.add(v.claim.name, v.status == "forced", v.describe())
        return _emit(report, args, EXIT_OK if chain.all_forced else EXIT_NEGATIVE)
    if args.objective:
        cert = (
            solver.minimize(args.objective)
            if args.minimize
            else solver.maximize(args.objective)
        )
        report.certificates.append(json.loads(certificate_to_json(lp, cert)))
        if cert.status == "optimal":
            report.add("optimum", True, f"{args.objective} = {cert.value}")
            return _emit(report, args, EXIT_OK)
        report.add("optimum", False, cert.status)
        return _emit(report, args, EXIT_NEGATIVE)
    cert = solver.feasibility()
    report.certificates.append(json.loads(certificate_to_json(lp, cert)))
    report.add("feasibility", cert.status == "feasible", cert.status)
    return _emit(report, args, EXIT_OK if cert.status == "feasible" else EXIT_NEGATIVE)


def cmd_search_code(args) -> int:
    report = _Report("search-code")
    try:
        text = _read(args.problem_file)
        problem = net.parse(text)
    except (OSError, net.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.digest("problem", text)
    outcome = exhaustive_search(
        problem,
        alphabet_bounds=args.alphabet_max,
        allow_randomness=args.randomness == "on",
        budget=_budget(args, 10_000_000),
        threads=args.threads,
    )
    report.add(
        "search",
        outcome.status == "found",
        f"{outcome.status}: {outcome.searched} of {outcome.total} candidates",
    )
    if outcome.status == "found":
        text = code_to_json(outcome.code)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        report.certificates.append(json.loads(text))
        return _emit(report, args, EXIT_OK)
    if outcome.status == "budget-exceeded":
        return _emit(report, args, EXIT_BUDGET)
    return _emit(report, args, EXIT_NEGATIVE)


def cmd_check_code(args) -> int:
    report = _Report("check-code")
    try:
        ptext = _read(args.problem_file)
        problem = net.parse(ptext)
        ctext = _read(args.code_file)
        code = code_from_json(problem, ctext)
    except (OSError, ValueError, net.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.digest("problem", ptext)
    report.digest("code", ctext)
    verdict = check_admissible(code)
    report.add("admissible", verdict.admissible, verdict.describe())
    return _emit(report, args, EXIT_OK if verdict else EXIT_NEGATIVE)


def cmd_gadget(args) -> int:
    report = _Report(f"gadget-{args.kind}")
    try:
        if args.kind == "incremental":
            h = EntropyVector.from_json(_read(args.h))
            gadget = build_incremental(h)
        elif args.kind == "secure":
            gadget = build_secure(args.c, args.d)
        else:
            inner = net.parse(_read(args.inner))
            gadget = adhere(inner)
    except (OSError, ValueError, KeyError, net.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    problem_text = net.serialize(gadget.problem)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(problem_text)
        report.add("problem", True, f"written to {args.out}")
    else:
        print(problem_text)
    if args.contract:
        with open(args.contract, "w", encoding="utf-8") as fh:
            fh.write(gadget.contract.to_json())
        report.add("contract", True, f"written to {args.contract}")
    if args.out or args.contract:
        print(report.render(args.json))
    return EXIT_OK


def _verify_key_forcing(args, report: _Report) -> bool:
    gadget = build_secure(args.c, args.d)
    contract = verify_contract(gadget.problem, gadget.contract)
    for r in contract.results:
        report.add(r.name, r.ok, r.detail)
    c = ent.as_fraction(args.c)
    d = ent.as_fraction(args.d)
    if c.denominator == 1 and d.denominator == 1:
        code = otp_code(c, d)
        verdict = check_admissible(code)
        report.add("one-time-pad-witness", verdict.admissible, verdict.describe())
        return contract.all_ok and verdict.admissible
    return contract.all_ok


def _verify_incremental(args, report: _Report) -> bool:
    if not args.h:
        raise ValueError("incremental-forcing needs --h <entropy vector file>")
    h = EntropyVector.from_json(_read(args.h))
    gadget = build_incremental(h)
    contract = verify_contract(gadget.problem, gadget.contract)
    for r in contract.results:
        report.add(r.name, r.ok, r.detail)
    return contract.all_ok


def _verify_uniform_witness(args, report: _Report) -> bool:
    if not args.q:
        raise ValueError("uniform-witness needs --q <distribution file>")
    q = JointDistribution.from_json(_read(args.q))
    if not ent.is_quasi_uniform(q):
        report.add("quasi-uniform", False, "input distribution is not quasi-uniform")
        return False
    report.add("quasi-uniform", True, "all subset marginals uniform")
    code = incremental_code(q)
    verdict = check_admissible(code)
    report.add("witness-code", verdict.admissible, verdict.describe())
    from entroflow.codes import induced_joint_distribution

    dist = induced_joint_distribution(code)
    names = q.names()
    h_in = ent.quasi_uniform_vector_of(q)
    vec = ent.entropy_vector_of(dist, names)
    drift = max(
        abs(float(vec.values[m]) - float(h_in.values[m]))
        for m in range(1, h_in.ground.full_mask + 1)
    )
    report.add("induced-streams-match", drift <= 1e-9, f"max coordinate drift {drift:.2e}")
    return verdict.admissible and drift <= 1e-9


def _verify_adhesion(args, report: _Report) -> bool:
    from entroflow.codes import CodeBuilder
    from entroflow.lp import feasibility

    ok = True
    # Unit-capacity relay: composition with the identity code.
    inner = net.problem_from_dict(
        {
            "nodes": ["u", "v"],
            "edges": [{"id": "e", "tail": "u", "head": "v", "capacity": "1"}],
            "sessions": [{"id": "S", "rate": "1", "origin": "u", "sinks": ["v"]}],
        }
    )
    gadget = adhere(inner)
    inner_code = CodeBuilder(inner).source("S", 2).edge("e", 2, lambda v: v["S"]).build()
    verdict = check_admissible(compose_adhered_code(gadget, inner_code))
    report.add("unit-relay-composition", verdict.admissible, verdict.describe())
    ok &= verdict.admissible
    # Half-capacity relay: the wrapped problem is LP-infeasible.
    thin = net.problem_from_dict(
        {
            "nodes": ["u", "v"],
            "edges": [{"id": "e", "tail": "u", "head": "v", "capacity": "1/2"}],
            "sessions": [{"id": "S", "rate": "1", "origin": "u", "sinks": ["v"]}],
        }
    )
    cert = feasibility(build_shannon_lp(adhere(thin).problem))
    report.add(
        "half-capacity-infeasible",
        cert.status == "infeasible",
        f"LP status {cert.status} with Farkas certificate",
    )
    ok &= cert.status == "infeasible"
    return bool(ok)


def cmd_verify(args) -> int:
    name = _VERIFY_ALIASES.get(args.name, args.name)
    report = _Report(f"verify-{name}")
    runners = {
        "key-forcing": _verify_key_forcing,
        "incremental-forcing": _verify_incremental,
        "uniform-witness": _verify_uniform_witness,
        "adhesion-demo": _verify_adhesion,
    }
    runner = runners.get(name)
    if runner is None:
        print(f"error: unknown experiment {args.name!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        passed = runner(args, report)
    except (OSError, ValueError, KeyError, net.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return _emit(report, args, EXIT_OK if passed else EXIT_NEGATIVE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entroflow",
        description="Exact analysis of network coding problems.",
    )
    parser.add_argument("--json", action="store_true", help="emit a JSON run report")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized probes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-entropic", help="polymatroid check plus witness search")
    p.add_argument("h_file")
    p.add_argument("--max-support", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_check_entropic)

    p = sub.add_parser("lp-bound", help="Shannon LP bound, feasibility, or proof chain")
    p.add_argument("problem_file")
    p.add_argument("--objective", help='expression, e.g. "H(T)" or "I(A;B|C)"')
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--verify-chain", help="JSON file with claim/relation/value entries")
    p.add_argument("--subnetwork", help="comma-separated variable names")
    p.add_argument("--no-reduce", action="store_true", help="keep all 2^n-1 coordinates")
    p.add_argument("--dump-lp", action="store_true", help="print the constraint system")
    p.set_defaults(func=cmd_lp_bound)

    p = sub.add_parser("search-code", help="bounded exhaustive code search")
    p.add_argument("problem_file")
    p.add_argument("--alphabet-max", type=int, default=2)
    p.add_argument("--randomness", choices=("on", "off"), default="off")
    p.add_argument("--budget", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write the found code as JSON")
    p.set_defaults(func=cmd_search_code)

    p = sub.add_parser("check-code", help="exact admissibility of an explicit code")
    p.add_argument("problem_file")
    p.add_argument("code_file")
    p.set_defaults(func=cmd_check_code)

    p = sub.add_parser("gadget", help="construct a test network")
    gsub = p.add_subparsers(dest="kind", required=True)
    g = gsub.add_parser("incremental")
    g.add_argument("--h", required=True, help="entropy vector JSON file")
    g.add_argument("--out")
    g.add_argument("--contract")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gadget)
    g = gsub.add_parser("secure")
    g.add_argument("--c", required=True)
    g.add_argument("--d", required=True)
    g.add_argument("--out")
    g.add_argument("--contract")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gadget)
    g = gsub.add_parser("adhere")
    g.add_argument("--inner", required=True, help="inner multicast problem JSON")
    g.add_argument("--out")
    g.add_argument("--contract")
    g.add_argument("--json", action="store_true")
    g.set_defaults(func=cmd_gadget)

    p = sub.add_parser(
        "verify",
        help="named verification experiments: key-forcing (prop1), "
        "incremental-forcing (thm1), uniform-witness (thm2), adhesion-demo (thm4-demo)",
    )
    p.add_argument("name")
    p.add_argument("--h", help="entropy vector file (incremental-forcing)")
    p.add_argument("--q", help="distribution file (uniform-witness)")
    p.add_argument("--c", default="1")
    p.add_argument("--d", default="2")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
