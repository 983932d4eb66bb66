#!/usr/bin/env python3
"""
skc: command-line analysis of multiterminal source models.

Verbs:
  info       entropies, I(X_M) with its minimising partitions, C(M) and R_CO
  classify   Type-S verdict and margin (exit 0 strict, 1 Type S, 2 not Type S)
  omnivocal  silent-terminal capacities and the omnivocality verdict
  protocol   pack spanning trees of G^(n), run the XOR protocol and verify it
  allocate   run and certify the hyperedge allocation for K_{m,t}
  gen        write a model document for one of the built-in families
  rsk        everything known about the communication complexity R_SK

Usage:
  python skc.py info chan4.json
  python skc.py protocol c4.json --n 3 --seed 7
  python skc.py gen sts 7 --out sts7.json
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from certifier import render_allocation, run_allocation, verify_claims
from model_core import (
    TOLERANCE,
    PinSource,
    format_set,
    format_value,
    full_set,
    load_model,
    serialize_model,
    value_to_json,
)
from model_zoo import FamilySpec, generate
from partition_engine import TypeSKind, classify_type_s, multipartite_info, pin_singleton_check
from rates import rsk_report
from silent_lp import omnivocality_report
from tree_protocol import Multigraph, run_protocol, verify_agreement, verify_secrecy

EXIT_ERROR = 3

# positional parameters of `skc gen <family> ...`
GEN_PARAMS = {
    "complete": [("m", int), ("t", int)],
    "cycle": [("m", int)],
    "path": [("m", int)],
    "harary": [("m", int), ("k", int)],
    "sts": [("m", int)],
    "chan": [("m", int)],
    "omni": [("m", int), ("p", float)],
    "random": [("m", int), ("n_edges", int)],
}


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=1, ensure_ascii=False))
    else:
        print(text)


def _partition_label(p) -> str:
    return f"S {p}" if p.is_singleton else str(p)


def cmd_info(args) -> int:
    source = load_model(args.model)
    info = multipartite_info(source, args.tolerance)
    h_full = source._h(full_set(source.m))
    singles = [source._h(1 << i) for i in range(source.m)]
    r_co = h_full - info.value
    text = "\n".join([
        f"m={source.m}",
        "H(X_i): " + ", ".join(f"{i + 1}:{format_value(h)}" for i, h in enumerate(singles)),
        f"H(X_M)={format_value(h_full)}",
        f"I={format_value(info.value)}, C(M)={format_value(info.value)}, R_CO={format_value(r_co)}",
        "argmin: " + ", ".join(_partition_label(p) for p in info.argmin),
    ])
    _emit(args, text, {
        "m": source.m,
        "entropies": [value_to_json(h) for h in singles],
        "h_full": value_to_json(h_full),
        "I": value_to_json(info.value),
        "capacity": value_to_json(info.value),
        "r_co": value_to_json(r_co),
        "argmin": [str(p) for p in info.argmin],
    })
    return 0


def cmd_classify(args) -> int:
    source = load_model(args.model)
    verdict = classify_type_s(source, args.tolerance)
    if isinstance(source, PinSource) and source.graph.uniformity() is not None:
        # hyperedge-count path must agree with the entropy path
        fast = pin_singleton_check(source)
        if fast.kind != verdict.kind or fast.margin != verdict.margin:
            raise RuntimeError(f"uniform PIN check gave {fast.kind}, entropy scan gave {verdict.kind}")
    _emit(args, verdict.describe(source.m), {
        "verdict": str(verdict.kind),
        "margin": value_to_json(verdict.margin),
        "delta_singleton": value_to_json(verdict.delta_singleton),
        "tie": verdict.tie,
        "witness": None if verdict.witness is None else format_set(verdict.witness),
    })
    return {TypeSKind.STRICT_TYPE_S: 0, TypeSKind.TYPE_S: 1, TypeSKind.NOT_TYPE_S: 2}[verdict.kind]


def cmd_omnivocal(args) -> int:
    source = load_model(args.model)
    report = omnivocality_report(source, args.tolerance)
    _emit(args, report.render(), {
        "verdict": str(report.verdict),
        "silent_terminals": report.silent_terminals,
        "capacity": value_to_json(report.sk_capacity),
        "type_s": str(report.type_s),
        "entries": [
            {
                "silent": e.silent,
                "capacity": value_to_json(e.capacity),
                "gap": value_to_json(e.gap),
                "rt_min": value_to_json(e.rt_min),
                "lower_bound": value_to_json(e.lower_bound),
                "delta_t": value_to_json(e.delta_t),
            }
            for e in report.entries
        ],
        "notes": report.notes,
    })
    return 0


def cmd_protocol(args) -> int:
    source = load_model(args.model)
    if not isinstance(source, PinSource):
        raise ValueError("the tree protocol needs a PIN graph model")
    graph = Multigraph.from_pin(source)
    run = run_protocol(graph, args.n, args.seed)
    agreement = verify_agreement(run)
    audit = verify_secrecy(run)
    agreed = all(agreement.values())
    text = (
        f"σ={run.key_length} key={run.key_length}b transcript={run.transcript_length}b "
        f"secrecy={'EXACT' if audit.secure else 'FAIL'} agreement={'OK' if agreed else 'FAIL'}"
    )
    doc = run.to_json()
    doc["verdicts"] = {
        "agreement": {str(k): v for k, v in agreement.items()},
        "secrecy": {
            "h_key": audit.h_key,
            "h_transcript": audit.h_transcript,
            "joint_rank": audit.joint_rank,
            "independent": audit.independent,
        },
    }
    if args.emit_run:
        Path(args.emit_run).write_text(json.dumps(doc, indent=1), encoding="utf-8")
    _emit(args, text, doc)
    return 0 if agreed and audit.secure else 1


def cmd_allocate(args) -> int:
    alloc = run_allocation(args.m, args.t)
    claims = verify_claims(args.m, args.t)
    status = "claims verified" if claims.passed else "claims FAILED"
    text = render_allocation(alloc) + f"\n{status}: {claims.total} terms, {claims.expected_per_receiver} per receiver"
    _emit(args, text, {
        "m": args.m,
        "t": args.t,
        "log": [{"receiver": a.receiver, "edge": list(alloc.order[a.j]), "donor": a.donor} for a in alloc.log],
        "failed_at": alloc.failed_at,
        "claims": {
            "no_error": claims.no_error,
            "total": claims.total,
            "expected_total": claims.expected_total,
            "per_receiver": {str(k): v for k, v in claims.per_receiver.items()},
            "exhausted": claims.exhausted,
            "passed": claims.passed,
        },
    })
    return 0 if claims.passed else 1


def cmd_gen(args) -> int:
    if args.family not in GEN_PARAMS:
        raise ValueError(f"unknown family {args.family!r}; choose from {', '.join(GEN_PARAMS)}")
    spec_params = GEN_PARAMS[args.family]
    if len(args.params) != len(spec_params):
        names = " ".join(name for name, _ in spec_params)
        raise ValueError(f"family {args.family} takes parameters: {names}")
    values = {name: kind(raw) for (name, kind), raw in zip(spec_params, args.params)}
    source = generate(FamilySpec(args.family, seed=args.seed, **values))
    doc = serialize_model(source)
    if args.out:
        Path(args.out).write_text(doc + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(doc)
    return 0


def cmd_rsk(args) -> int:
    source = load_model(args.model)
    report = rsk_report(source, args.tolerance)
    _emit(args, report.render(), report.to_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print a JSON report instead of text")
    common.add_argument("--seed", type=int, default=0, help="PRNG seed (default 0)")
    common.add_argument("--n", type=int, default=1, help="Number of source copies for the protocol (default 1)")
    common.add_argument("--out", default=None, help="Output path for gen")
    common.add_argument("--tolerance", type=float, default=TOLERANCE, help=f"Float comparison tolerance (default {TOLERANCE:g})")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(prog="skc", description="Secret-key capacity toolkit")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, fn, help_text in [
        ("info", cmd_info, "Entropies, I(X_M), C(M) and R_CO"),
        ("classify", cmd_classify, "Type-S classification"),
        ("omnivocal", cmd_omnivocal, "Silent-terminal analysis"),
        ("rsk", cmd_rsk, "Communication complexity report"),
    ]:
        p = sub.add_parser(verb, parents=[common], help=help_text)
        p.add_argument("model", help="Model document (JSON)")
        p.set_defaults(func=fn)

    p = sub.add_parser("protocol", parents=[common], help="Run and verify the tree XOR protocol")
    p.add_argument("model", help="Graph PIN model document (JSON)")
    p.add_argument("--emit-run", default=None, help="Write the full run report to this path")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("allocate", parents=[common], help="Hyperedge allocation for K_{m,t}")
    p.add_argument("m", type=int)
    p.add_argument("t", type=int)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("gen", parents=[common], help="Generate a model document")
    p.add_argument("family", help=", ".join(GEN_PARAMS))
    p.add_argument("params", nargs="*", help="Family parameters, e.g. m t")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
