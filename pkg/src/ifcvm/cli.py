"""Command-line interface: compile, asm, run, analyze, ni-check."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bytecode import AsmError, Program, parse_assembly, serialize_assembly, validate_program
from .cfg import CfgError, build_cfg
from .heap import dump_heap_json, render_value
from .interpreter import Machine, StepLimitExceeded, VMError
from .labels import DomainRegistry, LabelError, format_label
from .minijs import MiniJSError, compile_program
from .ni import check_ni, load_manifest, parse_input, report, report_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IFC_HALT = 3
EXIT_UNCAUGHT = 4
EXIT_NI_FAIL = 5


class _UsageError(Exception):
    pass


def _load_program(path: str, strict: bool = False) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}") from None
    if path.endswith(".ifcasm"):
        program = parse_assembly(text)
        problems = validate_program(program)
        if problems:
            raise _UsageError("invalid program: " + "; ".join(problems))
        return program
    return compile_program(text, strict=strict)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ifcvm", description="Bytecode interpreter with dynamic information flow control.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a source file to assembly")
    c.add_argument("source")
    c.add_argument("-o", "--output")
    c.add_argument("--strict", action="store_true")

    a = sub.add_parser("asm", help="validate an assembly file and print it in canonical form")
    a.add_argument("file")

    r = sub.add_parser("run", help="run a source or assembly file")
    r.add_argument("file")
    r.add_argument("--input", action="append", default=[], metavar="NAME=VALUE:LABEL")
    r.add_argument("--ifc", choices=("off", "deferred"), default="deferred")
    r.add_argument("--sparse", action="store_true")
    r.add_argument("--observer", default="low")
    r.add_argument("--trace", action="store_true")
    r.add_argument("--stats", action="store_true")
    r.add_argument("--no-heap", action="store_true", help="omit the heap dump")
    r.add_argument("--strict", action="store_true")
    r.add_argument("--max-steps", type=int, default=10_000_000)

    z = sub.add_parser("analyze", help="print control-flow graphs and post-dominator tables")
    z.add_argument("file")
    z.add_argument("--dump-cfg", action="store_true")
    z.add_argument("--dot", action="store_true", help="print Graphviz instead of adjacency lists")
    z.add_argument("--variant", choices=("plain", "handler"), default="plain")
    z.add_argument("--function", help="only this block")

    n = sub.add_parser("ni-check", help="run a non-interference manifest")
    n.add_argument("manifest")
    n.add_argument("--ifc", choices=("off", "deferred"), default="deferred")
    n.add_argument("--sparse", action="store_true")
    n.add_argument("--lockstep", action="store_true")
    n.add_argument("--json", metavar="PATH", help="also write a machine-readable summary")
    return ap


def _cmd_compile(args, out) -> int:
    text = serialize_assembly(_load_program(args.source, args.strict))
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def _cmd_asm(args, out) -> int:
    out.write(serialize_assembly(_load_program(args.file)))
    return EXIT_OK


def _cmd_run(args, out, err) -> int:
    if args.sparse and args.ifc == "off":
        raise _UsageError("--sparse requires --ifc=deferred")
    program = _load_program(args.file, args.strict)
    registry = DomainRegistry()
    inputs = {}
    for spec in args.input:
        try:
            name, value = parse_input(spec, registry)
        except ValueError as e:
            raise _UsageError(str(e)) from None
        inputs[name] = value
    observer = registry.parse(args.observer)
    trace = (lambda line: out.write(line + "\n")) if args.trace else None
    m = Machine(program, inputs, ifc=args.ifc == "deferred", sparse=args.sparse, registry=registry, trace=trace)
    try:
        result = m.run(args.max_steps)
    except StepLimitExceeded as e:
        err.write(f"error: {e}\n")
        return EXIT_USAGE
    fmt = lambda lab: format_label(lab, registry)  # noqa: E731
    if result.status == "end":
        v = result.value
        out.write(f"result: {render_value(v.value)!r} label={fmt(v.label)}\n")
    else:
        out.write(f"halt: {result.reason}: {result.detail}\n")
        if result.exception is not None:
            e = result.exception
            out.write(f"exception: {render_value(e.value)!r} label={fmt(e.label)}\n")
    if args.stats:
        s = result.stats
        out.write(f"steps: {s.steps}\njoins: {s.joins}\npushes: {s.pushes}\n")
    if not args.no_heap:
        out.write(dump_heap_json(result.heap, registry, observer) + "\n")
    if result.status == "end":
        return EXIT_OK
    return EXIT_UNCAUGHT if result.reason == "uncaught-exception" else EXIT_IFC_HALT


def _cmd_analyze(args, out) -> int:
    program = _load_program(args.file)
    handler = args.variant == "handler"
    blocks = [b for b in program.blocks if args.function in (None, b.name)]
    if not blocks:
        raise _UsageError(f"no block named {args.function!r}")
    chunks = []
    for b in blocks:
        cfg = build_cfg(b, handler)
        if args.dot:
            chunks.append(cfg.to_dot(b))
        else:
            if args.dump_cfg:
                chunks.append(cfg.adjacency_text())
            chunks.append(cfg.ipd_text())
    out.write("\n\n".join(chunks) + "\n")
    return EXIT_OK


def _cmd_ni(args, out) -> int:
    if args.sparse and args.ifc == "off":
        raise _UsageError("--sparse requires --ifc=deferred")
    try:
        cases = load_manifest(args.manifest)
    except OSError as e:
        raise _UsageError(f"cannot read manifest: {e}") from None
    except (KeyError, ValueError) as e:
        raise _UsageError(f"bad manifest: {e}") from None
    verdicts = [check_ni(c, ifc=args.ifc == "deferred", sparse=args.sparse, lockstep=args.lockstep) for c in cases]
    out.write(report(verdicts) + "\n")
    if args.json:
        Path(args.json).write_text(report_json(verdicts) + "\n")
    met = all(v.passed == (c.expect == "pass") for c, v in zip(cases, verdicts))
    return EXIT_OK if met else EXIT_NI_FAIL


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        if args.command == "compile":
            return _cmd_compile(args, out)
        if args.command == "asm":
            return _cmd_asm(args, out)
        if args.command == "run":
            return _cmd_run(args, out, err)
        if args.command == "analyze":
            return _cmd_analyze(args, out)
        return _cmd_ni(args, out)
    except (_UsageError, AsmError, MiniJSError, CfgError, LabelError, VMError) as e:
        err.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
