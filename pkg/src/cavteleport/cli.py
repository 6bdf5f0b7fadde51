"""Command-line interface: protocol runs, branch enumeration, correction
table verification, validity sweeps, and the feasibility estimate.

Output is machine-readable (json or csv) or human-readable (text), and is
byte-identical across invocations with the same configuration and seed.
Exit codes: 0 success, 1 scientific-check failure, 2 configuration error,
3 correction-table discrepancy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import corrections as corr
from . import dynamics as dyn
from . import protocol as prot
from . import validation as val
from .errors import CavteleportError, ConfigError

DEFAULT_SEED = 42
FIDELITY_EXIT_TOL = 1e-8

EXIT_OK = 0
EXIT_SCIENCE = 1
EXIT_CONFIG = 2
EXIT_TABLE = 3


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def parse_input_coefficients(text: str) -> prot.InputState:
    """Eight comma-separated reals, interleaved (re, im) per coefficient."""
    parts = text.split(",")
    if len(parts) != 8:
        raise ConfigError(f"--input needs 8 comma-separated reals, got {len(parts)}")
    try:
        reals = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--input: {exc}") from None
    v = np.array(
        [complex(reals[i], reals[i + 1]) for i in range(0, 8, 2)], dtype=complex
    )
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ConfigError("--input coefficients are all zero")
    if abs(norm - 1.0) >= 1e-6:
        raise ConfigError(
            f"--input coefficient norm {norm} is off by more than 1e-6; "
            "normalize the coefficients"
        )
    if norm != 1.0:
        if abs(norm - 1.0) > 1e-12:
            print(
                f"warning: input norm {norm} differs from 1; auto-normalizing",
                file=sys.stderr,
            )
        v = v / norm
    return prot.InputState(*v)


def parse_ratio_list(text: str) -> list[tuple[float, float]]:
    """'5,10,20' means points (5,5),(10,10),(20,20); 'a:b' gives (a,b)."""
    if not text.strip():
        raise ConfigError("empty ratio list")
    points = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            raise ConfigError(f"empty entry in ratio list {text!r}")
        try:
            if ":" in chunk:
                a, b = chunk.split(":")
                points.append((float(a), float(b)))
            else:
                r = float(chunk)
                points.append((r, r))
        except ValueError as exc:
            raise ConfigError(f"bad ratio entry {chunk!r}: {exc}") from None
    return points


def parse_int_list(text: str) -> list[int]:
    if not text.strip():
        raise ConfigError("empty list")
    try:
        return [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from None


def parse_lifetime(text: str) -> float | None:
    if text.strip().lower() == "none":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad lifetime {text!r}: {exc}") from None


def parse_force_outcome(text: str, n_controllers: int) -> tuple[str, str | None]:
    parts = text.split(",")
    if len(parts) == 1:
        alice, controllers = parts[0], None
    elif len(parts) == 2:
        alice, controllers = parts
    else:
        raise ConfigError(f"--force-outcome must be 'AAAA' or 'AAAA,CC', got {text!r}")
    if len(alice) != 4 or any(ch not in "ge" for ch in alice):
        raise ConfigError(f"bad Alice outcome {alice!r} (need 4 chars of g/e)")
    if controllers is not None and (
        len(controllers) != n_controllers or any(ch not in "ge" for ch in controllers)
    ):
        raise ConfigError(
            f"bad controller outcomes {controllers!r} "
            f"(need {n_controllers} chars of g/e)"
        )
    return alice, controllers


def resolve_params(args) -> dyn.PhysicalParams:
    g = 2 * np.pi * 1e3 * args.g_khz if args.g_khz is not None else args.g
    return dyn.PhysicalParams.from_ratios(
        g,
        args.delta_ratio,
        args.omega_ratio,
        t_radiative=getattr(args, "t_radiative", None),
        t_cavity=getattr(args, "t_cavity", None),
    )


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(schema: str, config: dict, rows: list[dict], summary: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"schema": schema, "config": config, "rows": rows, "summary": summary}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(
                buf, fieldnames=list(rows[0]), lineterminator="\n"
            )
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()
    lines = [f"# {schema}"]
    for k in sorted(config):
        lines.append(f"# {k} = {_fmt(config[k])}")
    if rows:
        keys = list(rows[0])
        widths = [
            max(len(k), max(len(_fmt(r[k])) for r in rows)) for k in keys
        ]
        lines.append("  ".join(k.ljust(w) for k, w in zip(keys, widths)))
        for r in rows:
            lines.append("  ".join(_fmt(r[k]).ljust(w) for k, w in zip(keys, widths)))
    for k in sorted(summary):
        lines.append(f"{k} = {_fmt(summary[k])}")
    return "\n".join(lines) + "\n"


def write_output(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    input_state = parse_input_coefficients(args.input)
    layout = prot.ProtocolLayout(
        n_controllers=args.controllers,
        schedule=dyn.InteractionSchedule(args.lambda_t, args.omega_t),
    )
    force_alice = force_controllers = None
    if args.force_outcome:
        force_alice, force_controllers = parse_force_outcome(
            args.force_outcome, args.controllers
        )
    rng = np.random.default_rng(args.seed)
    table = prot.default_table(layout)
    rows = []
    for trial in range(args.trials):
        rec = prot.run_teleportation(
            input_state,
            layout,
            rng,
            table=table,
            force_alice=force_alice,
            force_controllers=force_controllers,
        ).record
        rows.append(
            {
                "trial": trial,
                "alice_outcome": rec.alice_outcome,
                "controller_outcomes": rec.controller_outcomes,
                "probability": rec.probability,
                "correction": f"{rec.correction.op4},{rec.correction.op7}",
                "fidelity": rec.fidelity,
            }
        )
    min_fid = min(r["fidelity"] for r in rows)
    summary = {
        "trials": args.trials,
        "mean_fidelity": sum(r["fidelity"] for r in rows) / len(rows),
        "min_fidelity": min_fid,
    }
    config = {
        "seed": args.seed,
        "controllers": args.controllers,
        "input": args.input,
        "lambda_t": args.lambda_t,
        "omega_t": args.omega_t,
    }
    write_output(render("cavteleport/run/1", config, rows, summary, args.format), args.out)
    return EXIT_OK if min_fid >= 1.0 - FIDELITY_EXIT_TOL else EXIT_SCIENCE


def cmd_enumerate(args) -> int:
    input_state = parse_input_coefficients(args.input)
    layout = prot.ProtocolLayout(
        n_controllers=args.controllers,
        schedule=dyn.InteractionSchedule(args.lambda_t, args.omega_t),
    )
    records = prot.enumerate_all_branches(input_state, layout)
    rows = [
        {
            "alice_outcome": r.alice_outcome,
            "controller_outcomes": r.controller_outcomes,
            "probability": r.probability,
            "correction": f"{r.correction.op4},{r.correction.op7}",
            "fidelity": r.fidelity,
        }
        for r in records
    ]
    min_fid = min(r["fidelity"] for r in rows)
    summary = {
        "branches": len(rows),
        "probability_sum": sum(r["probability"] for r in rows),
        "min_fidelity": min_fid,
    }
    config = {
        "controllers": args.controllers,
        "input": args.input,
        "lambda_t": args.lambda_t,
        "omega_t": args.omega_t,
    }
    write_output(
        render("cavteleport/enumerate/1", config, rows, summary, args.format), args.out
    )
    return EXIT_OK if min_fid >= 1.0 - FIDELITY_EXIT_TOL else EXIT_SCIENCE


def cmd_verify_table(args) -> int:
    layout = prot.ProtocolLayout(n_controllers=args.controllers)
    derived = corr.derive_table(layout)
    if args.self_compare:
        reference = derived
    elif args.controllers == 1:
        reference = corr.load_published_table()
    else:
        raise ConfigError(
            "no published table beyond one controller; use --self-compare"
        )
    comparison = corr.compare_tables(reference, derived)
    rows = []
    for key in sorted(comparison.classifications):
        ref_rule, der_rule = reference.rules[key], derived.rules[key]
        rows.append(
            {
                "alice_outcome": key[0],
                "controller_outcomes": key[1],
                "reference_correction": f"{ref_rule.op4},{ref_rule.op7}",
                "derived_correction": f"{der_rule.op4},{der_rule.op7}",
                "classification": comparison.classifications[key],
            }
        )
    summary = {f"count_{k}": v for k, v in comparison.counts.items()}
    config = {"controllers": args.controllers, "self_compare": args.self_compare}
    write_output(
        render("cavteleport/verify-table/1", config, rows, summary, args.format),
        args.out,
    )
    return EXIT_TABLE if comparison.invalid_keys else EXIT_OK


def cmd_sweep(args) -> int:
    params = resolve_params(args)
    fock = dyn.FockConfig(args.fock_cutoff)
    base = dyn.PhysicalParams(params.g, params.delta, params.omega_rabi)
    if args.kind == "detuning":
        points = parse_ratio_list(args.ratios)
        result = val.effective_vs_full_sweep(points, base, fock)
        rows = [
            {
                "delta_over_g": result.axis[i],
                "omega_over_delta": result.meta["omega_over_delta"][i],
                "deficit": result.deficits[i],
                "fock_cutoff": result.fock_cutoffs[i],
                "converged": result.converged[i],
                "truncation_warned": result.truncation_warned[i],
            }
            for i in range(len(result.axis))
        ]
        summary = {"points": len(rows)}
        config = {"g": base.g, "fock_cutoff": args.fock_cutoff, "ratios": args.ratios}
        schema = "cavteleport/sweep-detuning/1"
    else:
        levels = parse_int_list(args.fock)
        point = parse_ratio_list(args.ratio)[0]
        result = val.thermal_insensitivity_sweep(levels, point, base, fock)
        rows = [
            {
                "initial_fock": int(result.axis[i]),
                "deficit": result.deficits[i],
                "fock_cutoff": result.fock_cutoffs[i],
                "converged": result.converged[i],
                "truncation_warned": result.truncation_warned[i],
            }
            for i in range(len(result.axis))
        ]
        summary = {"points": len(rows), "spread": result.spread()}
        config = {
            "g": base.g,
            "fock_cutoff": args.fock_cutoff,
            "fock_levels": args.fock,
            "ratio": args.ratio,
        }
        schema = "cavteleport/sweep-thermal/1"
    write_output(render(schema, config, rows, summary, args.format), args.out)
    return EXIT_OK


def cmd_feasibility(args) -> int:
    params = resolve_params(args)
    sched = dyn.InteractionSchedule(args.lambda_t, args.omega_t)
    report = val.feasibility_check(params, sched)
    rows = [
        {
            "interaction_time_s": report.interaction_time,
            "t_over_radiative": report.t_over_radiative,
            "t_over_cavity": report.t_over_cavity,
            "verdict": report.ok,
        }
    ]
    config = {
        "g": params.g,
        "delta": params.delta,
        "lambda_t": args.lambda_t,
        "t_radiative": params.t_radiative,
        "t_cavity": params.t_cavity,
    }
    write_output(
        render("cavteleport/feasibility/1", config, rows, {"verdict": report.ok}, args.format),
        args.out,
    )
    return EXIT_OK if report.ok else EXIT_SCIENCE


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_output_options(p):
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--out", default="-", help="output path, or - for stdout")


def _add_protocol_options(p):
    p.add_argument(
        "--input",
        default="1,0,0,0,0,0,0,0",
        help="8 reals: re,im pairs of the four input coefficients",
    )
    p.add_argument("--controllers", type=int, default=1)
    p.add_argument("--lambda-t", type=float, default=float(np.pi / 4))
    p.add_argument("--omega-t", type=float, default=float(np.pi))


def _add_physics_options(p):
    p.add_argument("--g", type=float, default=dyn.G_DEFAULT, help="coupling, rad/s")
    p.add_argument("--g-khz", type=float, default=None, help="coupling as f in g = 2*pi*f kHz")
    p.add_argument("--delta-ratio", type=float, default=10.0, help="detuning / g")
    p.add_argument("--omega-ratio", type=float, default=10.0, help="drive / detuning")
    p.add_argument("--fock-cutoff", type=int, default=8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavteleport",
        description="Controlled teleportation of a two-atom state in driven cavity QED",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="sample full protocol runs")
    _add_protocol_options(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--force-outcome", default=None, metavar="AAAA[,CC]")
    _add_output_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("enumerate", help="deterministically enumerate every branch")
    _add_protocol_options(p)
    _add_output_options(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify-table", help="re-derive corrections and compare")
    p.add_argument("--controllers", type=int, default=1)
    p.add_argument("--self-compare", action="store_true")
    _add_output_options(p)
    p.set_defaults(func=cmd_verify_table)

    p = sub.add_parser("sweep", help="full-model validity sweeps")
    p.add_argument("kind", choices=("detuning", "thermal"))
    _add_physics_options(p)
    p.add_argument("--ratios", default="5,10,20", help="detuning sweep points")
    p.add_argument("--fock", default="0,1,2", help="thermal sweep Fock levels")
    p.add_argument("--ratio", default="10", help="thermal sweep ratio point")
    _add_output_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("feasibility", help="interaction-time feasibility estimate")
    _add_physics_options(p)
    p.add_argument("--lambda-t", type=float, default=float(np.pi / 4))
    p.add_argument("--omega-t", type=float, default=float(np.pi))
    p.add_argument("--t-radiative", type=parse_lifetime, default=dyn.T_RADIATIVE_DEFAULT)
    p.add_argument("--t-cavity", type=parse_lifetime, default=dyn.T_CAVITY_DEFAULT)
    p.set_defaults(func=cmd_feasibility)
    _add_output_options(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CavteleportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
