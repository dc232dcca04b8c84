"""Command-line surface: transform, ud, channel, simulate, verify.

Reports are machine-readable JSON documents listing every numeric check with
its value, tolerance, and verdict; the human-readable summary is rendered
from the same document.  Exit codes: 0 all checks pass, 1 invalid input or
parameters, 2 numeric failure (singular source, violated identity, flagged
statistics).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, linalg
from .channel import no_signaling_check, sqrt_omega_in_retro_basis, symmetric_state
from .errors import RetrodictorError, ValidationError
from .formats import (
    ensemble_to_payload,
    matrix_to_rows,
    parse_ensemble_file,
    parse_povm_file,
    povm_to_payload,
    render_json,
    vector_to_pairs,
    write_json,
)
from .retrodiction import (
    retro_transform,
    retrodictive_prob_bayes,
    retrodictive_prob_symmetric,
)
from .sim import RNG_ALGORITHM, StatTable, empirical_report, sample
from .ud import (
    UdInstance,
    brute_force_dual,
    omega_closed_form,
    omega_in_retro_basis,
    omega_matrix,
    optimal_dual,
    optimal_predictive_povm,
    predictive_success_probability,
    retro_basis,
    retro_basis_closed_form,
    verify_purity_identification,
)
from .verify import Check, run_suites

SEED_ENV_VAR = "RETRODICTOR_SEED"

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_NUMERIC_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_INPUT, f"{self.prog}: error: {message}\n")


def _check_doc(check: Check) -> dict:
    return {
        "name": check.name,
        "value": check.value,
        "tolerance": check.tolerance,
        "passed": check.passed,
    }


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def _float_table(arr: np.ndarray) -> list:
    return [[_finite_or_none(v) for v in row] for row in np.atleast_2d(np.asarray(arr, float))]


def _emit(doc: dict, out_path: str | None) -> None:
    rendered = render_json(doc)
    if out_path:
        write_json(doc, out_path)
        for check in doc.get("checks", []):
            verdict = "PASS" if check["passed"] else "FAIL"
            print(f"[{verdict}] {check['name']}: {check['value']:.3e} (tolerance {check['tolerance']:.3e})")
        print(f"report written to {out_path}")
    else:
        sys.stdout.write(rendered)


def _base_doc(command: str) -> dict:
    return {
        "tool": {"name": "retrodictor", "version": __version__},
        "command": command,
    }


def _instance_from_args(args) -> UdInstance:
    eta = (args.eta1, 1.0 - args.eta1)
    if args.overlap is not None:
        return UdInstance.from_overlap(args.overlap, eta)
    return UdInstance(args.alpha, eta)


def cmd_transform(args) -> int:
    ensemble = parse_ensemble_file(args.ensemble)
    povm = parse_povm_file(args.povm)
    dual = retro_transform(ensemble, povm, support_restricted=args.support_restricted)

    worst_sym = 0.0
    for i in range(len(ensemble)):
        for j in range(len(povm)):
            if dual.retro_states[j] is None:
                continue
            worst_sym = max(
                worst_sym,
                abs(
                    retrodictive_prob_symmetric(dual, i, j)
                    - retrodictive_prob_bayes(ensemble, povm, i, j)
                ),
            )
    if dual.retro_povm.sum_target is None:
        completeness = Check("retro-povm-completeness", dual.completeness_residual(), 1e-10)
    else:
        # A singular source only promises completeness on its support.
        residual = linalg.maxabs(sum(dual.retro_povm.elements) - dual.retro_povm.sum_target)
        completeness = Check("retro-povm-completeness-on-support", residual, 1e-10)
    checks = [
        completeness,
        Check("retro-state-traces", dual.trace_residual(), 1e-10),
        Check("source-identity", dual.source_residual(), 1e-10),
        Check("symmetric-vs-bayes", worst_sym, 1e-9),
    ]

    doc = _base_doc("transform")
    doc["inputs"] = {
        "ensemble_path": args.ensemble,
        "povm_path": args.povm,
        "ensemble": ensemble_to_payload(ensemble),
        "povm": povm_to_payload(povm),
        "support_restricted": bool(args.support_restricted),
    }
    doc["derived"] = {
        "omega": matrix_to_rows(dual.omega.matrix),
        "unbiased": dual.omega.unbiased,
        "mu": [float(m) for m in dual.mu.mu],
        "undefined_outcomes": [j for j, s in enumerate(dual.retro_states) if s is None],
        "retro_povm": [matrix_to_rows(e) for e in dual.retro_povm.elements],
        "retro_states": [
            None if s is None else matrix_to_rows(s.matrix) for s in dual.retro_states
        ],
    }
    doc["checks"] = [_check_doc(c) for c in checks]
    doc["passed"] = all(c.passed for c in checks)
    _emit(doc, args.out)
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC_FAILURE


def cmd_ud(args) -> int:
    inst = _instance_from_args(args)
    opt = optimal_dual(inst)
    cf = omega_closed_form(inst)
    numeric_basis = retro_basis(inst)
    closed_basis = retro_basis_closed_form(inst)
    ud_povm = optimal_predictive_povm(inst)
    purity = verify_purity_identification(inst)
    spectrum = linalg.hermitian_eig(omega_matrix(inst))
    u = numeric_basis.matrix()
    eq16 = linalg.maxabs(
        linalg.dag(u) @ omega_matrix(inst) @ u - omega_in_retro_basis(inst)
    )
    bridge = abs(predictive_success_probability(inst, ud_povm) - opt.p_success)

    checks = [
        Check(
            "retro-basis-orthonormality",
            max(
                abs(numeric_basis.phi1.overlap(numeric_basis.phi2)),
                abs(float(np.linalg.norm(numeric_basis.phi1.amplitudes)) - 1.0),
                abs(float(np.linalg.norm(numeric_basis.phi2.amplitudes)) - 1.0),
            ),
            1e-9,
        ),
        Check(
            "retro-basis-closed-vs-numeric",
            max(
                linalg.maxabs(numeric_basis.phi1.amplitudes - closed_basis.phi1.amplitudes),
                linalg.maxabs(numeric_basis.phi2.amplitudes - closed_basis.phi2.amplitudes),
            ),
            1e-10,
        ),
        Check(
            "eigenvalues-closed-vs-numeric",
            max(abs(spectrum.eigenvalues[0] - cf.w2), abs(spectrum.eigenvalues[1] - cf.w1)),
            1e-10,
        ),
        Check("source-in-retro-basis", eq16, 1e-10),
        Check("failure-state-determinant", purity.failure_det_residual, 1e-10),
        Check("retro-state-identification", purity.max_residual, 1e-9),
        Check("duality-bridge", bridge, 1e-10),
    ]
    doc = _base_doc("ud")
    doc["inputs"] = {
        "alpha": inst.alpha,
        "eta": [inst.eta[0], inst.eta[1]],
        "overlap": inst.s,
        "theta": inst.theta,
    }
    doc["derived"] = {
        "regime": opt.regime,
        "mu": [opt.mu1, opt.mu2, opt.mu0],
        "p_success": opt.p_success,
        "omega": matrix_to_rows(omega_matrix(inst)),
        "omega_in_retro_basis": matrix_to_rows(omega_in_retro_basis(inst)),
        "omega_eigenvalues": [cf.w1, cf.w2],
        "omega_angle": cf.omega_angle,
        "retro_basis": {
            "phi1": vector_to_pairs(numeric_basis.phi1.amplitudes),
            "phi2": vector_to_pairs(numeric_basis.phi2.amplitudes),
        },
        "rho0_ret": matrix_to_rows(opt.rho0_ret.matrix),
        "predictive_povm": {
            "c": [ud_povm.c[0], ud_povm.c[1]],
            "elements": [matrix_to_rows(e) for e in ud_povm.povm.elements],
        },
    }
    if args.grid_check is not None:
        g1, g2, pg = brute_force_dual(inst, args.grid_check)
        doc["derived"]["grid_check"] = {"step": args.grid_check, "mu": [g1, g2], "p_success": pg}
        checks.append(Check("grid-oracle-deviation", abs(pg - opt.p_success), 2.0 * args.grid_check))
    doc["checks"] = [_check_doc(c) for c in checks]
    doc["passed"] = all(c.passed for c in checks)
    _emit(doc, args.out)
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC_FAILURE


def cmd_channel(args) -> int:
    inst = _instance_from_args(args)
    state = symmetric_state(inst)
    report = no_signaling_check(inst)
    om = omega_matrix(inst)
    sq = sqrt_omega_in_retro_basis(inst)
    checks = [
        Check("swap-residual", state.swap_residual(), 1e-10),
        Check(
            "reduced-states-vs-source",
            max(
                linalg.maxabs(state.reduced(0).matrix - om),
                linalg.maxabs(state.reduced(1).matrix - om),
            ),
            1e-10,
        ),
        Check("no-signaling-residual", report.max_residual, 1e-10),
        Check("sqrt-source-symmetry", abs(sq[0, 1] - sq[1, 0]), 1e-12),
    ]
    doc = _base_doc("channel")
    doc["inputs"] = {
        "alpha": inst.alpha,
        "eta": [inst.eta[0], inst.eta[1]],
        "overlap": inst.s,
    }
    doc["derived"] = {
        "symmetric_state": vector_to_pairs(state.amplitudes),
        "rho_a": matrix_to_rows(report.rho_a.matrix),
        "rho_a_tilde": matrix_to_rows(report.rho_a_tilde.matrix),
        "rho_b": matrix_to_rows(report.rho_b.matrix),
    }
    doc["checks"] = [_check_doc(c) for c in checks]
    doc["passed"] = all(c.passed for c in checks)
    _emit(doc, args.out)
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC_FAILURE


def _stat_table_doc(table: StatTable) -> dict:
    return {
        "empirical": _float_table(table.empirical),
        "analytic": _float_table(table.analytic),
        "deviation": _float_table(table.deviation),
        "bound_3sigma": _float_table(table.bound_3sigma),
        "defined": [[bool(v) for v in row] for row in np.atleast_2d(table.defined)],
        "violations": [list(idx) for idx in table.violations()],
    }


def cmd_simulate(args) -> int:
    ensemble = parse_ensemble_file(args.ensemble)
    povm = parse_povm_file(args.povm)
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    counts = sample(ensemble, povm, args.n, seed)
    report = empirical_report(counts, ensemble, povm)
    total_violations = sum(
        len(t.violations()) for t in (report.outcome, report.predictive, report.retrodictive)
    )
    checks = [Check("cells-beyond-3sigma", float(total_violations), 0.5)]
    doc = _base_doc("simulate")
    doc["inputs"] = {
        "ensemble_path": args.ensemble,
        "povm_path": args.povm,
        "n": args.n,
        "seed": seed,
        "rng_algorithm": RNG_ALGORITHM,
    }
    doc["derived"] = {
        "counts": [[int(v) for v in row] for row in counts.counts],
        "outcome": _stat_table_doc(report.outcome),
        "predictive": _stat_table_doc(report.predictive),
        "retrodictive": _stat_table_doc(report.retrodictive),
    }
    doc["checks"] = [_check_doc(c) for c in checks]
    doc["passed"] = all(c.passed for c in checks)
    _emit(doc, args.out)
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC_FAILURE


def cmd_verify(args) -> int:
    results = run_suites(args.suite)
    doc = _base_doc("verify")
    doc["inputs"] = {"suites": [r.suite for r in results]}
    doc["suites"] = [
        {"suite": r.suite, "checks": [_check_doc(c) for c in r.checks], "passed": r.passed}
        for r in results
    ]
    doc["passed"] = all(r.passed for r in results)
    for r in results:
        for line in r.lines():
            print(line)
    if args.out:
        write_json(doc, args.out)
        print(f"report written to {args.out}")
    print("verify: PASS" if doc["passed"] else "verify: FAIL")
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC_FAILURE


def _add_instance_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta1", type=float, required=True, help="prior of the first state, in (0, 1)")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--alpha", type=float, help="state half-angle in radians, in (0, pi/4]")
    group.add_argument("--overlap", type=float, help="state overlap s = cos(2 alpha), in [0, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="retrodictor", description=__doc__)
    parser.add_argument("--version", action="version", version=f"retrodictor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("transform", help="retrodictive dual of an ensemble/POVM pair")
    p.add_argument("ensemble", help="ensemble JSON file")
    p.add_argument("povm", help="POVM JSON file")
    p.add_argument("--support-restricted", action="store_true",
                   help="invert the source on its support only (singular sources)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("ud", help="optimal dual of two-state unambiguous discrimination")
    _add_instance_arguments(p)
    p.add_argument("--grid-check", type=float, default=None, metavar="STEP",
                   help="also run the brute-force grid oracle at this step")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_ud)

    p = sub.add_parser("channel", help="symmetric entangled channel and no-signaling checks")
    _add_instance_arguments(p)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("simulate", help="seeded Monte Carlo sampling of a prepare-measure pair")
    p.add_argument("ensemble", help="ensemble JSON file")
    p.add_argument("povm", help="POVM JSON file")
    p.add_argument("--n", type=int, required=True, help="number of samples (>= 1)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", action="append", default=None,
                   help="suite name (repeatable): transform, ud, channel, simulate, failure-modes, all")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors via exit
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except RetrodictorError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC_FAILURE


if __name__ == "__main__":
    sys.exit(main())
