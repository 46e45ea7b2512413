"""Command-line interface: JSON ensembles in, machine-readable reports out.

Exit codes partition outcomes: 0 when the sought property holds (certified
optimum, Optimal verdict, fixed point), 2 for parse or validation errors,
3 when the computation succeeded but the property does not hold, 4 for
internal numerical failures. Reports go to stdout (or --out); diagnostics
and wall-clock timing go to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time

import numpy as np

from .belavkin import forward_map, inverse_map, roundtrip_check
from .certify import OPTIMAL, certify_full, certify_simplified, fixpoint_check
from .ensembles import ProjectiveMeasurement, random_ensemble, success_probability, validate_projective
from .errors import MEDError, RankSignatureMismatch, SolverFailed
from .linalg import DEFAULT_TOL
from .serialize import (
    dumps,
    ensemble_from_doc,
    ensemble_to_doc,
    load_json,
    measurement_to_doc,
    povm_from_doc,
)
from .solver import SolveConfig, generate_fixed_point, solve, solve_oracle

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNCERTIFIED = 3
EXIT_NUMERICAL = 4

_TOL_FLAGS = ("tol_psd", "tol_rank", "tol_recon", "tol_fixpoint")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medli",
        description="Minimum-error discrimination toolkit for linearly independent ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the primary output to this path instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--quiet", action="store_true", help="suppress stderr diagnostics")
        for flag in _TOL_FLAGS:
            p.add_argument(f"--{flag.replace('_', '-')}", type=float, default=None, dest=flag)
        return p

    p = common(sub.add_parser("solve", help="find and certify the optimal measurement"))
    p.add_argument("input")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--oracle", action="store_true", help="use the brute-force oracle (dim<=4, m<=3)")

    p = common(sub.add_parser("certify", help="check optimality of a measurement for an ensemble"))
    p.add_argument("input")
    p.add_argument("povm")

    p = common(sub.add_parser("map", help="apply the ensemble transform or its inverse"))
    p.add_argument("input")
    p.add_argument("--direction", choices=("forward", "inverse"), required=True)
    p.add_argument("--restarts", type=int, default=16)

    p = common(sub.add_parser("roundtrip", help="deviations of both transform compositions"))
    p.add_argument("input")
    p.add_argument("--restarts", type=int, default=16)

    p = common(sub.add_parser("gen", help="generate a random or fixed-point ensemble file"))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--signature", required=True, help='comma-separated ranks, e.g. "2,1,1"')
    p.add_argument("--fixed-point", action="store_true")

    p = common(sub.add_parser("fixpoint", help="test whether the PGM is already optimal"))
    p.add_argument("input")
    return parser


def _tolerances(args):
    overrides = {flag: getattr(args, flag) for flag in _TOL_FLAGS if getattr(args, flag) is not None}
    return DEFAULT_TOL.replace(**overrides) if overrides else DEFAULT_TOL


def _tol_echo(args) -> dict:
    return {flag: getattr(args, flag) for flag in _TOL_FLAGS}


def _diag(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message, file=sys.stderr)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, args_echo: dict, digest, **fields) -> dict:
    doc = {
        "command": command,
        "args": args_echo,
        "input_digest": digest,
        "success_prob": fields.pop("success_prob", None),
        "dual_value": fields.pop("dual_value", None),
        "verdict": fields.pop("verdict", None),
        "residuals": fields.pop("residuals", None),
        "measurement": fields.pop("measurement", None),
        "fixed_point": fields.pop("fixed_point", None),
        "timings": fields.pop("timings", None),
    }
    doc.update(fields)
    return doc


def _residuals_block(report) -> dict:
    return {
        "stationarity": report.stationarity_residual,
        "min_slack_eig": report.min_slack_eig,
        "positivity_min_eig": report.positivity_min_eig,
        "hermiticity": report.hermiticity_residual,
    }


def _load_ensemble(args, path, tol):
    doc, data = load_json(path)
    return ensemble_from_doc(doc, tol), _digest(data)


def cmd_solve(args) -> int:
    tol = _tolerances(args)
    try:
        ensemble, digest = _load_ensemble(args, args.input, tol)
    except (MEDError, OSError) as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    started = time.perf_counter()
    try:
        if args.oracle:
            result = solve_oracle(ensemble, seed=args.seed, tol=tol)
        else:
            result = solve(ensemble, SolveConfig(restarts=args.restarts, seed=args.seed), tol=tol)
    except (MEDError, np.linalg.LinAlgError) as exc:
        _diag(args, f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    _diag(args, f"solve finished in {time.perf_counter() - started:.3f}s")
    doc = _report(
        "solve",
        {
            "seed": args.seed,
            "restarts": None if args.oracle else args.restarts,
            "oracle": bool(args.oracle),
            "tolerances": _tol_echo(args),
        },
        digest,
        success_prob=result.success_prob,
        dual_value=result.report.dual_value,
        verdict=result.report.verdict,
        residuals=_residuals_block(result.report),
        measurement=measurement_to_doc(result.measurement),
        timings={"iterations": result.iterations, "certified": result.certified},
    )
    _write(args, dumps(doc))
    return EXIT_OK if result.certified else EXIT_UNCERTIFIED


def cmd_certify(args) -> int:
    tol = _tolerances(args)
    try:
        ensemble, digest_in = _load_ensemble(args, args.input, tol)
        povm_doc, povm_data = load_json(args.povm)
        povm = povm_from_doc(povm_doc, tol)
        if povm.m != ensemble.m or povm.dim != ensemble.dim:
            raise RankSignatureMismatch(
                f"measurement ({povm.m} outcomes, dim {povm.dim}) does not match "
                f"ensemble ({ensemble.m} states, dim {ensemble.dim})"
            )
        projective: ProjectiveMeasurement | None
        try:
            projective = validate_projective(povm.elements, tol)
        except MEDError:
            projective = None
        if projective is not None and projective.rank_signature != ensemble.rank_signature:
            raise RankSignatureMismatch(
                f"projector ranks {projective.rank_signature} != state ranks "
                f"{ensemble.rank_signature}"
            )
    except (MEDError, OSError) as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    try:
        full = certify_full(ensemble, povm, tol)
        simplified = (
            certify_simplified(ensemble, projective, tol) if projective is not None else None
        )
    except (MEDError, np.linalg.LinAlgError) as exc:
        _diag(args, f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    doc = _report(
        "certify",
        {"tolerances": _tol_echo(args)},
        {"ensemble": digest_in, "measurement": _digest(povm_data)},
        success_prob=success_probability(ensemble, povm, tol),
        dual_value=full.dual_value,
        verdict=full.verdict,
        residuals=_residuals_block(full),
        simplified_verdict=None if simplified is None else simplified.verdict,
        verdicts_agree=None if simplified is None else simplified.verdict == full.verdict,
    )
    _write(args, dumps(doc))
    return EXIT_OK if full.verdict == OPTIMAL else EXIT_UNCERTIFIED


def cmd_map(args) -> int:
    tol = _tolerances(args)
    try:
        ensemble, digest = _load_ensemble(args, args.input, tol)
    except (MEDError, OSError) as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    echo = {
        "direction": args.direction,
        "seed": args.seed,
        "restarts": args.restarts,
        "tolerances": _tol_echo(args),
    }
    if args.direction == "forward":
        try:
            result = solve(ensemble, SolveConfig(restarts=args.restarts, seed=args.seed), tol=tol)
        except (MEDError, np.linalg.LinAlgError) as exc:
            _diag(args, f"numerical failure: {exc}")
            return EXIT_NUMERICAL
        if not result.certified:
            _diag(args, "forward map requires a certified optimum; solve was uncertified")
            doc = _report(
                "map",
                echo,
                digest,
                success_prob=result.success_prob,
                dual_value=result.report.dual_value,
                verdict=result.report.verdict,
                residuals=_residuals_block(result.report),
                timings={"iterations": result.iterations, "certified": False},
            )
            _write(args, dumps(doc))
            return EXIT_UNCERTIFIED
        try:
            image = forward_map(ensemble, result.measurement, result.certificate, tol)
        except (MEDError, np.linalg.LinAlgError) as exc:
            _diag(args, f"numerical failure: {exc}")
            return EXIT_NUMERICAL
        doc = _report(
            "map",
            echo,
            digest,
            success_prob=result.success_prob,
            dual_value=result.report.dual_value,
            verdict=result.report.verdict,
            residuals=_residuals_block(result.report),
            measurement=measurement_to_doc(result.measurement),
            timings={"iterations": result.iterations, "certified": True},
            ensemble=ensemble_to_doc(image),
        )
        _write(args, dumps(doc))
        return EXIT_OK
    try:
        pre_image, measurement, certificate, _ = inverse_map(ensemble, tol)
        report = certify_simplified(pre_image, measurement, tol)
    except (MEDError, np.linalg.LinAlgError) as exc:
        _diag(args, f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    if report.verdict != OPTIMAL:
        _diag(args, f"inverse map failed to self-certify: verdict {report.verdict}")
        return EXIT_NUMERICAL
    doc = _report(
        "map",
        echo,
        digest,
        success_prob=success_probability(pre_image, measurement, tol),
        dual_value=certificate.dual_value,
        verdict=report.verdict,
        residuals=_residuals_block(report),
        measurement=measurement_to_doc(measurement),
        timings={"iterations": 0, "certified": True},
        ensemble=ensemble_to_doc(pre_image),
    )
    _write(args, dumps(doc))
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    tol = _tolerances(args)
    try:
        ensemble, digest = _load_ensemble(args, args.input, tol)
    except (MEDError, OSError) as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    solver = lambda e: solve(e, SolveConfig(restarts=args.restarts, seed=args.seed), tol=tol)
    try:
        report = roundtrip_check(ensemble, solver, tol)
    except SolverFailed as exc:
        _diag(args, f"uncertified: {exc}")
        return EXIT_UNCERTIFIED
    except (MEDError, np.linalg.LinAlgError) as exc:
        _diag(args, f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    doc = _report(
        "roundtrip",
        {"seed": args.seed, "restarts": args.restarts, "tolerances": _tol_echo(args)},
        digest,
        residuals={
            "forward_then_inverse": report.p_deviation,
            "inverse_then_forward": report.q_deviation,
        },
    )
    _write(args, dumps(doc))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        signature = tuple(int(part) for part in args.signature.split(","))
    except ValueError:
        _diag(args, f"input error: cannot parse signature {args.signature!r}")
        return EXIT_INPUT
    tol = _tolerances(args)
    try:
        if args.fixed_point:
            ensemble = generate_fixed_point(args.dim, signature, args.seed, tol)
        else:
            ensemble = random_ensemble(args.dim, signature, args.seed, tol)
    except MEDError as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    kind = "fixed-point" if args.fixed_point else "random"
    label = f"{kind} d={args.dim} signature={args.signature} seed={args.seed}"
    _write(args, dumps(ensemble_to_doc(ensemble, label=label)))
    return EXIT_OK


def cmd_fixpoint(args) -> int:
    tol = _tolerances(args)
    try:
        ensemble, digest = _load_ensemble(args, args.input, tol)
    except (MEDError, OSError) as exc:
        _diag(args, f"input error: {exc}")
        return EXIT_INPUT
    try:
        result = fixpoint_check(ensemble, tol)
    except (MEDError, np.linalg.LinAlgError) as exc:
        _diag(args, f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    doc = _report(
        "fixpoint",
        {"tolerances": _tol_echo(args)},
        digest,
        fixed_point={
            "is_fixed": result.is_fixed,
            "c_estimate": result.c_estimate,
            "residual": result.residual,
        },
    )
    _write(args, dumps(doc))
    return EXIT_OK if result.is_fixed else EXIT_UNCERTIFIED


_HANDLERS = {
    "solve": cmd_solve,
    "certify": cmd_certify,
    "map": cmd_map,
    "roundtrip": cmd_roundtrip,
    "gen": cmd_gen,
    "fixpoint": cmd_fixpoint,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _HANDLERS[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
