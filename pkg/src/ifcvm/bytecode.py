"""Instruction set, code blocks, and the ``.ifcasm`` text format."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .values import NULL, PRIM_OPS, UNDEFINED

CONST_KINDS = frozenset({"num", "bool", "str", "undefined", "null"})
R = frozenset({"reg"})
N = frozenset({"num"})
B = frozenset({"bool"})
ID = frozenset({"id"})
PROP = frozenset({"prop"})
FN = frozenset({"fn"})
T = frozenset({"target"})
OP = frozenset({"op"})
R_OR_CONST = R | CONST_KINDS

# operand signatures; prim is checked separately because its arity depends on the operator
SIGNATURES: dict[str, tuple[frozenset, ...]] = {
    "enter": (),
    "mov": (R, R_OR_CONST),
    "jfalse": (R, T),
    "loop-if-less": (R, R, T),
    "jmp": (T,),
    "typeof": (R, R),
    "instanceof": (R, R, R),
    "ret": (R,),
    "end": (R,),
    "call": (R, N, R),
    "call-put-result": (R,),
    "call-eval": (R, N, R),
    "construct": (R, N, R),
    "create-arguments": (R,),
    "create-activation": (R,),
    "create-this": (R,),
    "new-object": (R,),
    "new-func": (R, FN),
    "get-by-id": (R, R, PROP),
    "put-by-id": (R, PROP, R, B),
    "del-by-id": (R, R, PROP),
    "put-getter-setter": (R, PROP, R, R),
    "get-pnames": (R, R, R, R, T),
    "next-pname": (R, R, R, R, R, T),
    "resolve": (R, ID),
    "resolve-skip": (R, ID, N),
    "resolve-global": (R, ID),
    "resolve-base": (R, ID, B),
    "resolve-with-base": (R, R, ID),
    "get-scoped-var": (R, N, N),
    "put-scoped-var": (N, N, R),
    "push-scope": (R,),
    "pop-scope": (),
    "jmp-scope": (N, T),
    "throw": (R,),
    "catch": (R,),
    "prim": (),
}

OPCODES = frozenset(SIGNATURES)
BRANCHES = frozenset({"jfalse", "loop-if-less", "get-pnames", "next-pname"})
JUMPS = frozenset({"jmp", "jmp-scope"})
# instructions that may raise; the set is deliberately conservative
THROWING = frozenset({
    "throw", "call", "call-eval", "construct",
    "resolve", "resolve-skip", "resolve-global", "resolve-base", "resolve-with-base",
    "get-by-id", "put-by-id", "del-by-id",
})
TERMINATORS = frozenset({"ret", "end", "jmp", "jmp-scope", "throw"})


class AsmError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Operand:
    kind: str
    value: object = None

    def __str__(self) -> str:
        k, v = self.kind, self.value
        if k == "reg":
            return f"r{v}"
        if k == "num":
            return "n:" + _format_num(v)
        if k == "bool":
            return "b:true" if v else "b:false"
        if k == "str":
            return "s:" + json.dumps(v)
        if k in ("undefined", "null"):
            return k
        if k == "target":
            return f"@{v}"
        return f"{k}:{v}"

    def const_value(self):
        if self.kind == "undefined":
            return UNDEFINED
        if self.kind == "null":
            return NULL
        return self.value


def _format_num(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def reg(i: int) -> Operand:
    return Operand("reg", i)


def num(v) -> Operand:
    return Operand("num", v)


def target(i: int) -> Operand:
    return Operand("target", i)


@dataclass(frozen=True)
class Instruction:
    opcode: str
    operands: tuple[Operand, ...] = ()

    def regs(self) -> list[int]:
        return [o.value for o in self.operands if o.kind == "reg"]

    def targets(self) -> list[int]:
        return [o.value for o in self.operands if o.kind == "target"]


@dataclass(frozen=True)
class ExceptionEntry:
    """Instructions in [start, end) that raise transfer to ``handler``.

    ``depth`` is how many scope nodes this frame had pushed when the try began;
    unwinding trims the scope chain back to it.
    """

    start: int
    end: int
    handler: int
    depth: int = 0

    def covers(self, index: int) -> bool:
        return self.start <= index < self.end


@dataclass(frozen=True)
class CodeBlock:
    name: str
    instructions: tuple[Instruction, ...]
    register_count: int
    arg_count: int = 0
    strict: bool = False
    exception_table: tuple[ExceptionEntry, ...] = ()
    functions: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()
    domain: str | None = None
    _decoded: list = field(default=None, compare=False, repr=False, hash=False)

    def handler_for(self, index: int) -> ExceptionEntry | None:
        for entry in self.exception_table:
            if entry.covers(index):
                return entry
        return None

    def decoded(self) -> list[tuple]:
        """Instructions as (opcode, raw operand values...) tuples, cached."""
        if self._decoded is None:
            rows = []
            for ins in self.instructions:
                rows.append((ins.opcode, *[_raw(o) for o in ins.operands]))
            object.__setattr__(self, "_decoded", rows)
        return self._decoded


def _raw(o: Operand):
    if o.kind in CONST_KINDS:
        return o.const_value()
    return o.value


@dataclass(frozen=True)
class Program:
    blocks: tuple[CodeBlock, ...]

    def __post_init__(self) -> None:
        if not self.blocks:
            raise AsmError("program has no code blocks")
        seen = set()
        for b in self.blocks:
            if b.name in seen:
                raise AsmError(f"duplicate function name {b.name!r}")
            seen.add(b.name)

    @property
    def entry(self) -> CodeBlock:
        return self.blocks[0]

    def block(self, name: str) -> CodeBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def by_name(self) -> dict[str, CodeBlock]:
        return {b.name: b for b in self.blocks}


# ---------------------------------------------------------------- parsing

_HEADER_RE = re.compile(r"^func\s+([A-Za-z_$][\w$.]*)\s*\(([^()]*)\)\s*$")
_LABEL_DEF_RE = re.compile(r"^@([A-Za-z_][\w.$]*)\s*:\s*")
_NAME = r"[A-Za-z_$][\w$.]*"
_TOKEN_RE = re.compile(r'\s*(s:"(?:[^"\\]|\\.)*"|[^,\s]+)\s*(,|$)')


@dataclass
class _Piece:
    text: str
    line: int
    col: int


def _split(text: str) -> list[_Piece | str]:
    """Split source into statement pieces and brace tokens, dropping comments."""
    out: list[_Piece | str] = []
    buf: list[str] = []
    start = None
    line, col = 1, 1
    in_str = False
    escape = False
    comment = False

    def flush():
        nonlocal buf, start
        s = "".join(buf).strip()
        if s:
            lead = len("".join(buf)) - len("".join(buf).lstrip())
            out.append(_Piece(s, start[0], start[1] + lead))
        buf = []
        start = None

    for ch in text:
        if comment:
            if ch == "\n":
                comment = False
                flush()
        elif in_str:
            buf.append(ch)
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_str = False
        elif ch == "#":
            comment = True
        elif ch in "\n;":
            flush()
        elif ch in "{}":
            flush()
            out.append(_Piece(ch, line, col))
        else:
            if start is None:
                start = (line, col)
            if ch == '"':
                in_str = True
            buf.append(ch)
        if ch == "\n":
            line += 1
            col = 1
        else:
            col += 1
    if in_str:
        raise AsmError("unterminated string literal", line, col)
    flush()
    return out


def _parse_operand(tok: str, line: int, col: int) -> Operand:
    if tok == "undefined":
        return Operand("undefined")
    if tok == "null":
        return Operand("null")
    if re.fullmatch(r"r\d+", tok):
        return Operand("reg", int(tok[1:]))
    if tok.startswith("@"):
        name = tok[1:]
        if not re.fullmatch(r"[A-Za-z_][\w.$]*", name):
            raise AsmError(f"bad label reference {tok!r}", line, col)
        return Operand("target", name)
    kind, sep, rest = tok.partition(":")
    if not sep:
        raise AsmError(f"bad operand {tok!r}", line, col)
    if kind == "n":
        return Operand("num", _parse_num(rest, line, col))
    if kind == "b":
        if rest not in ("true", "false"):
            raise AsmError(f"bad boolean {tok!r}", line, col)
        return Operand("bool", rest == "true")
    if kind == "s":
        try:
            value = json.loads(rest)
        except json.JSONDecodeError:
            raise AsmError(f"bad string literal {rest!r}", line, col) from None
        if not isinstance(value, str):
            raise AsmError(f"bad string literal {rest!r}", line, col)
        return Operand("str", value)
    if kind in ("id", "prop", "fn", "op"):
        if not rest or not re.fullmatch(r"[A-Za-z_$][\w$.\-]*|\d+", rest):
            raise AsmError(f"bad name in {tok!r}", line, col)
        return Operand(kind, rest)
    raise AsmError(f"unknown operand kind {kind!r}", line, col)


def _parse_num(text: str, line: int, col: int):
    if text == "nan":
        return math.nan
    if text in ("inf", "-inf"):
        return math.inf if text == "inf" else -math.inf
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise AsmError(f"bad number {text!r}", line, col) from None


def _tokens(text: str, line: int, col: int) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise AsmError("cannot tokenize operands", line, col + pos)
        toks.append((m.group(1), col + m.start(1)))
        pos = m.end()
        if m.group(2) == "" and pos < len(text):
            raise AsmError("expected ',' between operands", line, col + pos)
    return toks


class _BlockBuilder:
    def __init__(self, name: str, params: dict, line: int, col: int) -> None:
        self.name = name
        self.params = params
        self.line, self.col = line, col
        self.instructions: list[tuple[Instruction, int, int]] = []
        self.labels: dict[str, int] = {}
        self.tries: list[tuple[list, int, int]] = []
        self.strict = False
        self.functions: list[str] = []
        self.variables: list[str] = []
        self.domain: str | None = None

    def finish(self) -> CodeBlock:
        def resolve(op: Operand, line: int, col: int, limit: int) -> int:
            if op.value not in self.labels:
                raise AsmError(f"dangling label @{op.value}", line, col)
            idx = self.labels[op.value]
            if idx > limit:
                raise AsmError(f"label @{op.value} out of range", line, col)
            return idx

        n = len(self.instructions)
        out = []
        for ins, line, col in self.instructions:
            ops = tuple(
                Operand("target", resolve(o, line, col, n)) if o.kind == "target" else o
                for o in ins.operands
            )
            out.append(Instruction(ins.opcode, ops))
        table = []
        for ops, line, col in self.tries:
            start = resolve(ops[0], line, col, n)
            end = resolve(ops[1], line, col, n)
            handler = resolve(ops[2], line, col, n)
            depth = ops[3] if len(ops) > 3 else 0
            table.append(ExceptionEntry(start, end, handler, depth))
        regs = self.params.get("regs")
        if regs is None:
            used = [r for ins, _, _ in self.instructions for r in ins.regs()]
            regs = max(used, default=-1) + 1
            regs = max(regs, self.params.get("args", 0) + 1)
        return CodeBlock(
            name=self.name,
            instructions=tuple(out),
            register_count=regs,
            arg_count=self.params.get("args", 0),
            strict=self.strict,
            exception_table=tuple(table),
            functions=tuple(self.functions),
            variables=tuple(self.variables),
            domain=self.domain,
        )


def _parse_header(piece: _Piece) -> tuple[str, dict]:
    m = _HEADER_RE.match(piece.text)
    if not m:
        raise AsmError(f"expected 'func NAME(...)', got {piece.text!r}", piece.line, piece.col)
    params = {}
    for item in filter(None, (s.strip() for s in m.group(2).split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in ("regs", "args") or not val.strip().isdigit():
            raise AsmError(f"bad function parameter {item!r}", piece.line, piece.col)
        params[key] = int(val)
    return m.group(1), params


def _names_list(text: str, piece: _Piece) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    for n in names:
        if not re.fullmatch(_NAME, n):
            raise AsmError(f"bad name {n!r}", piece.line, piece.col)
    return names


def _directive(b: _BlockBuilder, piece: _Piece) -> None:
    word, _, rest = piece.text.partition(" ")
    rest = rest.strip()
    if word == ".strict":
        if rest:
            raise AsmError(".strict takes no operands", piece.line, piece.col)
        b.strict = True
    elif word == ".func":
        b.functions.extend(_names_list(rest, piece))
    elif word == ".vars":
        b.variables.extend(_names_list(rest, piece))
    elif word == ".domain":
        if not re.fullmatch(_NAME, rest):
            raise AsmError(f"bad domain {rest!r}", piece.line, piece.col)
        b.domain = rest
    elif word == ".try":
        parts = [p for p in re.split(r"[\s,]+", rest) if p]
        if len(parts) not in (3, 4):
            raise AsmError(".try expects @from @to @handler [depth=N]", piece.line, piece.col)
        ops: list = [_parse_operand(p, piece.line, piece.col) for p in parts[:3]]
        if any(o.kind != "target" for o in ops):
            raise AsmError(".try operands must be labels", piece.line, piece.col)
        if len(parts) == 4:
            m = re.fullmatch(r"depth=(\d+)", parts[3])
            if not m:
                raise AsmError(f"bad .try depth {parts[3]!r}", piece.line, piece.col)
            ops.append(int(m.group(1)))
        b.tries.append((ops, piece.line, piece.col))
    else:
        raise AsmError(f"unknown directive {word}", piece.line, piece.col)


def _check_signature(opcode: str, ops: list[Operand], line: int, col: int) -> None:
    if opcode == "prim":
        if len(ops) < 3 or ops[1].kind != "op":
            raise AsmError("prim expects dst, op:TAG, src[, src]", line, col)
        tag = ops[1].value
        if tag not in PRIM_OPS:
            raise AsmError(f"unknown prim operator {tag!r}", line, col)
        want = 2 + PRIM_OPS[tag]
        if len(ops) != want:
            raise AsmError(f"arity mismatch: prim {tag} takes {want} operands, got {len(ops)}", line, col)
        for o in ops[:1] + ops[2:]:
            if o.kind != "reg":
                raise AsmError(f"prim operands must be registers, got {o}", line, col)
        return
    sig = SIGNATURES[opcode]
    if len(ops) != len(sig):
        raise AsmError(f"arity mismatch: {opcode} takes {len(sig)} operands, got {len(ops)}", line, col)
    for i, (o, kinds) in enumerate(zip(ops, sig)):
        if o.kind not in kinds:
            raise AsmError(f"operand {i + 1} of {opcode} has kind {o.kind}, expected {'/'.join(sorted(kinds))}", line, col)


def parse_assembly(text: str) -> Program:
    """Parse ``.ifcasm`` text into a Program (first function is the entry)."""
    pieces = _split(text)
    blocks: list[CodeBlock] = []
    i = 0
    while i < len(pieces):
        p = pieces[i]
        if p.text in "{}":
            raise AsmError(f"unexpected {p.text!r}", p.line, p.col)
        name, params = _parse_header(p)
        i += 1
        if i >= len(pieces) or pieces[i].text != "{":
            raise AsmError("expected '{' after function header", p.line, p.col)
        i += 1
        b = _BlockBuilder(name, params, p.line, p.col)
        closed = False
        while i < len(pieces):
            q = pieces[i]
            i += 1
            if q.text == "}":
                closed = True
                break
            if q.text == "{":
                raise AsmError("unexpected '{'", q.line, q.col)
            text, col = q.text, q.col
            while True:
                m = _LABEL_DEF_RE.match(text)
                if not m:
                    break
                label = m.group(1)
                if label in b.labels:
                    raise AsmError(f"duplicate label @{label}", q.line, col)
                b.labels[label] = len(b.instructions)
                col += m.end()
                text = text[m.end():]
            if not text:
                continue
            if text.startswith("."):
                _directive(b, _Piece(text, q.line, col))
                continue
            opcode, _, rest = text.partition(" ")
            if opcode not in OPCODES:
                raise AsmError(f"unknown opcode {opcode!r}", q.line, col)
            rest_col = col + len(opcode) + 1
            ops = [_parse_operand(t, q.line, c) for t, c in _tokens(rest, q.line, rest_col)] if rest.strip() else []
            _check_signature(opcode, ops, q.line, col)
            b.instructions.append((Instruction(opcode, tuple(ops)), q.line, col))
        if not closed:
            raise AsmError(f"function {name} is missing '}}'", p.line, p.col)
        blocks.append(b.finish())
    if not blocks:
        raise AsmError("no functions found", 1, 1)
    return Program(tuple(blocks))


# ---------------------------------------------------------------- serialization

def serialize_block(cb: CodeBlock) -> str:
    n = len(cb.instructions)
    wanted = set()
    for ins in cb.instructions:
        wanted.update(ins.targets())
    for e in cb.exception_table:
        wanted.update((e.start, e.end, e.handler))
    names = {i: f"L{i}" for i in sorted(wanted)}
    lines = [f"func {cb.name}(regs={cb.register_count}, args={cb.arg_count}) {{"]
    if cb.strict:
        lines.append("  .strict")
    if cb.domain:
        lines.append(f"  .domain {cb.domain}")
    if cb.functions:
        lines.append("  .func " + ", ".join(cb.functions))
    if cb.variables:
        lines.append("  .vars " + ", ".join(cb.variables))
    for e in cb.exception_table:
        depth = f" depth={e.depth}" if e.depth else ""
        lines.append(f"  .try @{names[e.start]} @{names[e.end]} @{names[e.handler]}{depth}")
    for i, ins in enumerate(cb.instructions):
        if i in names:
            lines.append(f"@{names[i]}:")
        ops = ", ".join(f"@{names[o.value]}" if o.kind == "target" else str(o) for o in ins.operands)
        lines.append(f"  {ins.opcode} {ops}".rstrip())
    if n in names:
        lines.append(f"@{names[n]}:")
    lines.append("}")
    return "\n".join(lines)


def serialize_assembly(p: Program) -> str:
    return "\n\n".join(serialize_block(b) for b in p.blocks) + "\n"


# ---------------------------------------------------------------- validation

def validate(cb: CodeBlock, program: Program | None = None) -> list[str]:
    """Return human-readable problems with ``cb``; empty when well formed."""
    diags: list[str] = []
    n = len(cb.instructions)
    if n == 0:
        diags.append(f"{cb.name}: empty block")
        return diags
    if cb.arg_count + 1 > cb.register_count:
        diags.append(f"{cb.name}: {cb.arg_count} arguments need at least {cb.arg_count + 1} registers")
    known = program.by_name() if program is not None else None
    for i, ins in enumerate(cb.instructions):
        where = f"{cb.name}[{i}] {ins.opcode}"
        if ins.opcode not in OPCODES:
            diags.append(f"{where}: unknown opcode")
            continue
        try:
            _check_signature(ins.opcode, list(ins.operands), 0, 0)
        except AsmError as e:
            diags.append(f"{where}: {e.message}")
            continue
        for r in ins.regs():
            if not 0 <= r < cb.register_count:
                diags.append(f"{where}: register r{r} out of range (regs={cb.register_count})")
        for t in ins.targets():
            if not 0 <= t < n:
                diags.append(f"{where}: jump target {t} outside block of {n} instructions")
        if ins.opcode in ("call", "call-eval", "construct"):
            base, argc = ins.operands[2].value, ins.operands[1].value
            if not isinstance(argc, int) or argc < 0:
                diags.append(f"{where}: bad argument count {argc}")
            elif base + argc >= cb.register_count:
                diags.append(f"{where}: arguments r{base}..r{base + argc} out of range")
        if ins.opcode in ("get-scoped-var", "put-scoped-var", "resolve-skip", "jmp-scope"):
            for o in ins.operands:
                if o.kind == "num" and (not isinstance(o.value, int) or o.value < 0):
                    diags.append(f"{where}: count operand must be a non-negative integer")
        if ins.opcode == "new-func":
            fname = ins.operands[1].value
            if fname not in cb.functions:
                diags.append(f"{where}: function {fname!r} not declared with .func")
            elif known is not None and fname not in known:
                diags.append(f"{where}: function {fname!r} not defined in program")
    last = cb.instructions[-1].opcode
    if last not in TERMINATORS:
        diags.append(f"{cb.name}: control falls off the end after {last}")
    for e in cb.exception_table:
        if not (0 <= e.start < e.end <= n):
            diags.append(f"{cb.name}: exception range [{e.start}, {e.end}) out of bounds")
        if not 0 <= e.handler < n:
            diags.append(f"{cb.name}: exception handler {e.handler} out of bounds")
        elif cb.instructions[e.handler].opcode != "catch":
            diags.append(f"{cb.name}: exception handler {e.handler} is not a catch instruction")
        if e.depth < 0:
            diags.append(f"{cb.name}: negative handler scope depth")
    return diags


def validate_program(p: Program) -> list[str]:
    diags = []
    for b in p.blocks:
        diags.extend(validate(b, p))
    return diags
