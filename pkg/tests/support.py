"""Shared helpers for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from ifcvm import DomainRegistry, Machine
from ifcvm.bytecode import CodeBlock, ExceptionEntry, Instruction, Operand, num, reg, target
from ifcvm.labels import BOTTOM
from ifcvm.minijs import compile_program
from ifcvm.ni import load_manifest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
MANIFEST = CORPUS / "manifest.json"


def run_source(src: str, h=None, *, ifc: bool = True, sparse: bool = False, debug: bool = False,
               trace=None, extra: dict | None = None, strict: bool = False):
    """Compile and run ``src`` with an optional secret ``h`` labeled {h}."""
    registry = DomainRegistry(["h"])
    inputs = dict(extra or {})
    if h is not None:
        inputs["h"] = (h, registry.label("h"))
    m = Machine(compile_program(src, strict=strict), inputs, ifc=ifc, sparse=sparse,
                registry=registry, debug=debug, trace=trace)
    return m, m.run(200_000), registry


def corpus_cases():
    return load_manifest(MANIFEST)


def random_graph(rng: random.Random, n: int) -> tuple[list[list[int]], int]:
    """A graph on ``n`` nodes plus a sink where every node reaches the sink.

    Each node gets one forward edge so the sink stays reachable, then a few
    arbitrary edges, which may point backwards and form loops.
    """
    sink = n
    succ: list[list[int]] = []
    for v in range(n):
        out = {rng.randint(v + 1, min(n, v + 1 + rng.randint(0, 6)))}
        for _ in range(rng.choice((0, 0, 1, 1, 2))):
            out.add(rng.randint(0, n))
        succ.append(sorted(out))
    succ.append([])
    return succ, sink


def random_block(rng: random.Random, n: int, name: str = "f") -> CodeBlock:
    """A random code block whose graph always reaches an exit.

    Branches may go anywhere, plain jumps only go forward, and handlers sit
    after the ranges they cover, so every node has a forward path.
    """
    ins: list[Instruction] = []
    for i in range(n - 1):
        r = rng.random()
        if r < 0.25:
            ins.append(Instruction("jfalse", (reg(0), target(rng.randint(0, n - 1)))))
        elif r < 0.35:
            ins.append(Instruction("jmp", (target(rng.randint(i + 1, n - 1)),)))
        elif r < 0.45:
            ins.append(Instruction("throw", (reg(0),)))
        elif r < 0.55:
            ins.append(Instruction("get-by-id", (reg(1), reg(0), _prop("p"))))
        elif r < 0.6:
            ins.append(Instruction("ret", (reg(0),)))
        else:
            ins.append(Instruction("mov", (reg(1), num(i))))
    ins.append(Instruction("ret", (reg(0),)))
    table = []
    pos = 0
    while pos < n - 3 and rng.random() < 0.6:
        start = rng.randint(pos, n - 3)
        end = rng.randint(start + 1, n - 2)
        handler = rng.randint(end, n - 2)
        ins[handler] = Instruction("catch", (reg(1),))
        table.append(ExceptionEntry(start, end, handler))
        pos = handler + 1
    return CodeBlock(name, tuple(ins), 2, 0, exception_table=tuple(table))


def _prop(name: str) -> Operand:
    return Operand("prop", name)


def bottom_inputs() -> dict:
    return {"h": (0, BOTTOM)}
