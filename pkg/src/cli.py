"""
Command Line Front End
Reads a problem file, runs one solver and writes a JSON or pretty report.

    python main.py check --input data/problems/water_tank.json
    python main.py min-interaction --input data/problems/min_interaction_demo.json --oracle
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

from colorama import Fore, Style, init

from behavior import Behavior
from control import (
    STATUS_SOLVED,
    Certificate,
    SynthesisResult,
    canonical_controller,
    certify,
    control_manifest,
    hidden_behavior,
    is_implementable,
    is_regularly_implementable,
    manifest_behavior,
    synthesize,
)
from iopart import solve_io_partition
from limits import load_limits
from minint import minimize_interaction
from polymat import PolyMatrix, PolyMatrixError, degree_limit
from problem_file import ProblemFile, ProblemFileError, load_problem, serialize_problem

init(autoreset=True)

logger = logging.getLogger(__name__)

COMMANDS = ("check", "canonical", "synthesize", "min-interaction", "io-partition", "verify")

EXIT_OK = 0
EXIT_UNSOLVABLE = 1
EXIT_INPUT_ERROR = 2


def _behavior_report(B: Behavior) -> Dict[str, Any]:
    return {"vars": list(B.vars), "rep": B.rep.to_wire()}


def _result_report(result: SynthesisResult) -> Dict[str, Any]:
    report: Dict[str, Any] = {}
    if result.controller is not None:
        report["controller"] = _behavior_report(result.controller)
    if result.V is not None:
        report["V"] = result.V.to_wire()
    if result.solved:
        report["irrelevant"] = list(result.irrelevant)
    report.update(result.details)
    return report


def _certificate_report(certificate: Optional[Certificate]) -> Optional[Dict[str, Any]]:
    return certificate.as_dict() if certificate is not None else None


def run(command: str, pf: ProblemFile, oracle: bool = False) -> Tuple[Dict[str, Any], int]:
    """
    Dispatch one command

    Returns:
        (report, exit status)
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    p = pf.to_problem()
    report: Dict[str, Any] = {
        "command": command,
        "problem": json.loads(serialize_problem(pf)),
        "status": STATUS_SOLVED,
        "result": {},
        "certificate": None,
    }

    if command == "check":
        report["result"] = {
            "implementable": is_implementable(p),
            "regularly_implementable": is_regularly_implementable(p),
            "hidden_behavior": _behavior_report(hidden_behavior(p)),
            "manifest_behavior": _behavior_report(manifest_behavior(p)),
            "control_manifest": _behavior_report(control_manifest(p)),
        }
        return report, EXIT_OK

    if command == "canonical":
        Ccan = canonical_controller(p)
        report["result"] = {"controller": _behavior_report(Ccan)}
        report["certificate"] = _certificate_report(certify(p, Ccan))
        return report, EXIT_OK

    if command == "verify":
        controller = pf.controller_behavior()
        if controller is None:
            raise ProblemFileError("verify needs a 'controller' matrix in the problem file")
        certificate = certify(p, controller)
        report["result"] = {"controller": _behavior_report(controller)}
        report["certificate"] = _certificate_report(certificate)
        if not certificate.passed:
            report["status"] = "verification_failed"
            return report, EXIT_UNSOLVABLE
        return report, EXIT_OK

    if command == "synthesize":
        result = synthesize(p)
    elif command == "min-interaction":
        result = minimize_interaction(p, oracle=oracle,
                                      oracle_max_columns=pf.options.oracle_max_columns)
    else:
        if not p.declared_outputs:
            raise ProblemFileError("io-partition needs 'declared_outputs' in the problem file")
        result = solve_io_partition(p)

    report["status"] = result.status
    report["result"] = _result_report(result)
    report["certificate"] = _certificate_report(result.certificate)
    return report, EXIT_OK if result.solved else EXIT_UNSOLVABLE


def _pretty_matrix(wire: List, indent: str = "    ") -> str:
    M = PolyMatrix.from_wire(wire, cols=len(wire[0]) if wire else 0)
    return "\n".join(indent + line for line in M.pretty().splitlines())


def render_pretty(report: Dict[str, Any]) -> str:
    lines = [
        f"{Fore.CYAN}{'=' * 60}",
        f"{Fore.CYAN}  {report['command']}",
        f"{Fore.CYAN}{'=' * 60}",
    ]
    ok = report["status"] == STATUS_SOLVED
    colour = Fore.GREEN if ok else Fore.RED
    lines.append(f"Status: {colour}{report['status']}{Style.RESET_ALL}")

    for key, value in report["result"].items():
        if isinstance(value, dict) and "rep" in value:
            lines.append(f"{Fore.YELLOW}{key}{Style.RESET_ALL} over ({', '.join(value['vars'])}):")
            lines.append(_pretty_matrix(value["rep"]) if value["rep"] else "    (no equations)")
        elif key == "V":
            lines.append(f"{Fore.YELLOW}V{Style.RESET_ALL}:")
            lines.append(_pretty_matrix(value) if value else "    (empty)")
        else:
            lines.append(f"{Fore.YELLOW}{key}{Style.RESET_ALL}: {value}")

    certificate = report.get("certificate")
    if certificate:
        lines.append(f"{Fore.CYAN}Certificate:")
        for key, value in certificate.items():
            if value is None:
                continue
            mark = f"{Fore.GREEN}yes" if value else f"{Fore.RED}no"
            lines.append(f"  {key:<26} {mark}{Style.RESET_ALL}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="main.py",
        description="Controller synthesis for linear differential systems in kernel form",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", required=True, help="problem file (JSON)")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("json", "pretty"), default="json")
    parser.add_argument("--max-degree", type=int, help="polynomial degree cap")
    parser.add_argument("--oracle", action="store_true",
                        help="cross-check min-interaction against exhaustive search")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    limits = load_limits()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, limits.log_level.upper(), logging.INFO),
        format="%(asctime)s | %(levelname)s | %(message)s",
    )

    try:
        pf = load_problem(args.input)
        cap = args.max_degree or pf.options.max_degree or limits.max_degree
        with degree_limit(cap):
            report, status = run(args.command, pf, oracle=args.oracle)
    except (ProblemFileError, PolyMatrixError, ValueError) as e:
        print(f"{Fore.RED}❌ {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    text = render_pretty(report) if args.format == "pretty" else json.dumps(report, indent=2) + "\n"
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
        colour = Fore.GREEN if status == EXIT_OK else Fore.YELLOW
        print(f"{colour}Report written to {args.output} ({report['status']})", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
