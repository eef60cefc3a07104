"""Command-line entry point: ``cfgenum <command> ...``.

Exit codes: 0 success, 1 unreadable or malformed input, 2 semantic error
(for example a unit cycle), 3 an oracle bound was exceeded.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from typing import List, Optional

from . import oracle
from .enumerator import Evaluation, format_output
from .errors import CfgEnumError, FormatError, ScaleLimit
from .grammar import parse_grammar, render_grammar, to_2nf
from .pdann import ProfileMachine, parse_pdann, pdann_to_grammar
from .spanner import (END_MARKER, decode_output, format_mapping, parse_extraction_grammar,
                      translate)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def _input_text(args) -> str:
    if args.text is not None:
        return args.text
    if args.input_file is not None:
        text = _read(args.input_file)
        return text[:-1] if text.endswith("\n") else text
    raise FormatError("give the input with --text or --input-file")


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_grammar(path: str, mode: str):
    """Return (annotated grammar, extraction grammar or None) for a file in ``mode``."""
    text = _read(path)
    if mode == "spanner":
        h = parse_extraction_grammar(text)
        return translate(h), h
    if mode == "pdann":
        return pdann_to_grammar(parse_pdann(text)), None
    return parse_grammar(text), None


def cmd_run(args) -> int:
    g, h = _load_grammar(args.grammar, args.mode)
    w = _input_text(args)
    if h is not None:
        w += END_MARKER
    started = time.perf_counter()
    ev = Evaluation(g, w, args.limit)
    prep_seconds = time.perf_counter() - started
    delays: List[int] = []
    count = 0
    max_len = 0
    last = 0
    out = sys.stdout
    for output in ev:
        steps = ev.enumeration.steps if ev.enumeration is not None else 0
        delays.append(steps - last)
        last = steps
        count += 1
        max_len = max(max_len, len(output))
        if h is not None:
            out.write(format_mapping(decode_output(output, h.variables)) + "\n")
        else:
            out.write(format_output(output) + "\n")
    out.flush()
    if args.stats:
        stats = {
            "preprocessing_seconds": prep_seconds,
            "counters": vars(ev.counters),
            "outputs": count,
            "max_output_length": max_len,
            "ecs_nodes": ev.store.node_count(),
            "delay_steps": {
                "min": min(delays) if delays else 0,
                "median": statistics.median(delays) if delays else 0,
                "max": max(delays) if delays else 0,
            },
        }
        _write(args.stats, json.dumps(stats, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_normalize(args) -> int:
    g = parse_grammar(_read(args.grammar))
    _write(args.out, to_2nf(g).render())
    return 0


def cmd_translate(args) -> int:
    h = parse_extraction_grammar(_read(args.grammar))
    _write(args.out, render_grammar(translate(h)))
    return 0


def cmd_profile(args) -> int:
    p = parse_pdann(_read(args.pdann))
    result = ProfileMachine(p).run(_input_text(args))
    print(json.dumps({"profile": list(result.profile), "steps": result.steps,
                      "budget": result.budget}))
    return 0


def _verdict_json(v) -> dict:
    witness = v.witness
    if isinstance(witness, tuple):
        witness = "".join(str(t) for t in witness)
    return {"ok": v.ok, "witness": witness, "bound": v.bound}


CHECKS = ("equiv", "unambiguous", "rigid", "functional")


def cmd_verify(args) -> int:
    report = {"max_len": args.max_len, "checks": {}}
    checks = args.checks or ["equiv", "unambiguous"]
    unknown = sorted(set(checks) - set(CHECKS))
    if unknown:
        raise FormatError(f"unknown check(s): {', '.join(unknown)}")
    if args.mode == "spanner":
        h = parse_extraction_grammar(_read(args.grammar))
        for check in checks:
            if check == "functional":
                v = oracle.check_functional_upto(h, args.max_len)
                entry = _verdict_json(v)
                entry["note"] = ("bounded search: only ref-words over documents of length "
                                 f"<= {args.max_len} with <= {v.bound} symbols were examined")
            elif check == "unambiguous":
                entry = _verdict_json(oracle.check_refword_unambiguous_upto(h, args.max_len))
            elif check == "equiv":
                entry = _spanner_equiv(h, args)
            else:
                raise FormatError(f"check {check!r} is not available for extraction grammars")
            report["checks"][check] = entry
    else:
        g, _ = _load_grammar(args.grammar, args.mode)
        for check in checks:
            if check == "unambiguous":
                entry = _verdict_json(oracle.check_unambiguous_upto(g, args.max_len))
            elif check == "rigid":
                entry = _verdict_json(oracle.check_rigid_upto(g, args.max_len))
            elif check == "equiv":
                entry = _grammar_equiv(g, args)
            else:
                raise FormatError(f"check {check!r} needs --mode spanner")
            report["checks"][check] = entry
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _inputs(args, alphabet):
    if args.input is not None:
        return [args.input]
    return list(oracle._strings(alphabet, args.max_len))


def _grammar_equiv(g, args) -> dict:
    for w in _inputs(args, g.alphabet):
        if len(w) > args.max_len:
            raise ScaleLimit(f"input longer than --max-len {args.max_len}")
        got = list(Evaluation(g, w))
        want = oracle.brute_outputs(g, w)
        if len(got) != len(set(got)) or set(got) != want:
            return {"ok": False, "witness": w, "bound": args.max_len}
    return {"ok": True, "witness": None, "bound": args.max_len}


def _spanner_equiv(h, args) -> dict:
    g = translate(h)
    for d in _inputs(args, h.alphabet):
        if len(d) > args.max_len:
            raise ScaleLimit(f"input longer than --max-len {args.max_len}")
        got = [tuple(sorted(decode_output(o, h.variables).items()))
               for o in Evaluation(g, d + END_MARKER)]
        want = oracle.brute_mappings(h, d).mappings
        if len(got) != len(set(got)) or set(got) != want:
            return {"ok": False, "witness": d, "bound": args.max_len}
    return {"ok": True, "witness": None, "bound": args.max_len}


def cmd_report(args) -> int:
    from .report import scaling_report

    scaling_report(args.out_dir, quick=args.quick)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfgenum",
                                     description="Enumerate outputs of annotated grammars.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p):
        p.add_argument("--text", help="input string given inline")
        p.add_argument("--input-file", help="read the input string from a file")

    p = sub.add_parser("run", help="stream the outputs of a grammar on a string as JSONL")
    p.add_argument("grammar")
    add_input(p)
    p.add_argument("--limit", type=int, help="stop after this many outputs")
    p.add_argument("--stats", help="write run statistics as JSON to this path")
    p.add_argument("--mode", choices=["grammar", "pdann", "spanner"], default="grammar")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("normalize", help="write the arity-two normal form of a grammar")
    p.add_argument("grammar")
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("translate", help="turn an extraction grammar into an annotated grammar")
    p.add_argument("grammar")
    p.add_argument("--out")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("profile", help="stack-height profile of a PDAnn's accepting run")
    p.add_argument("pdann")
    add_input(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", help="bounded brute-force checks")
    p.add_argument("grammar")
    p.add_argument("checks", nargs="*", metavar="CHECK",
                   help="equiv, unambiguous, rigid or functional (default: equiv unambiguous)")
    p.add_argument("--input", help="check equivalence on this string only")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--mode", choices=["grammar", "pdann", "spanner"], default="grammar")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="measure preprocessing growth and plot it")
    p.add_argument("--out-dir", default="report")
    p.add_argument("--quick", action="store_true", help="smaller input sizes")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    # checks may follow the options: "verify g.ag --max-len 4 rigid"
    if extra and args.command == "verify" and not any(e.startswith("-") for e in extra):
        args.checks = list(args.checks) + extra
    elif extra:
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ScaleLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CfgEnumError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
