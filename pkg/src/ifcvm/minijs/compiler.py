"""Lower the source language to bytecode CodeBlocks.

Variables live in registers unless a nested function captures them or the
function's names can be reached dynamically (``with``, direct ``eval``, or a
dynamic descendant); those live in the function's activation environment and
are accessed with scoped-variable instructions. Names whose lookup path
crosses a dynamic function are resolved by name at runtime.

``finally`` blocks are duplicated on every exit path, and the covered try
ranges are split around each copy, so every try statement has plain join
points for the post-dominator analysis.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..bytecode import CodeBlock, ExceptionEntry, Instruction, Operand, Program
from . import ast as A
from .parser import MiniJSError, parse


class CompileError(MiniJSError):
    """A construct that parses but is outside the compiled subset."""


BINARY_TAGS = {
    "+": "add", "-": "sub", "*": "mul", "/": "div", "%": "mod",
    "==": "eq", "!=": "neq", "===": "stricteq", "!==": "nstricteq",
    "<": "less", "<=": "lesseq", ">": "greater", ">=": "greatereq",
    "<<": "lshift", ">>": "rshift", ">>>": "urshift",
    "&": "bitand", "|": "bitor", "^": "bitxor",
}
UNARY_TAGS = {"!": "not", "-": "negate", "~": "bitnot", "+": "to-number"}
_PROP_NAME = re.compile(r"[A-Za-z_$][\w$.\-]*|\d+")


def R(i: int) -> Operand:
    return Operand("reg", i)


def _const(v) -> Operand:
    if v is None:
        return Operand("undefined")
    if isinstance(v, bool):
        return Operand("bool", v)
    if isinstance(v, str):
        return Operand("str", v)
    return Operand("num", v)


def _err(msg: str, node) -> CompileError:
    line, col = node.pos or (0, 0)
    return CompileError(msg, line, col)


# ---------------------------------------------------------------- scope analysis

@dataclass(eq=False)
class FuncInfo:
    node: object  # A.Func or A.Program
    parent: FuncInfo | None
    kind: str  # "main", "func" or "eval"
    strict: bool
    params: list[str]
    body: list
    declared: list[str] = field(default_factory=list)
    funcdecls: list[A.Func] = field(default_factory=list)
    refs: set[str] = field(default_factory=set)
    children: list[FuncInfo] = field(default_factory=list)
    eval_calls: bool = False
    uses_with: bool = False
    uses_eval: bool = False
    captured: set[str] = field(default_factory=set)
    act_vars: list[str] = field(default_factory=list)
    has_activation: bool = False
    block_name: str = ""

    @property
    def dynamic(self) -> bool:
        return self.kind == "eval" or self.uses_with or self.uses_eval

    def declare(self, name: str) -> None:
        if name not in self.declared:
            self.declared.append(name)

    def chain(self):
        f = self
        while f is not None:
            yield f
            f = f.parent


class _Collector:
    """Records declarations, references, and nested functions of one body."""

    def __init__(self, info: FuncInfo, infos: dict[int, FuncInfo]) -> None:
        self.info = info
        self.infos = infos

    def func(self, fn: A.Func, parent: FuncInfo) -> FuncInfo:
        info = FuncInfo(fn, parent, "func", parent.strict or fn.strict, list(fn.params), fn.body)
        for p in fn.params:
            info.declare(p)
        parent.children.append(info)
        self.infos[id(fn)] = info
        sub = _Collector(info, self.infos)
        for s in fn.body:
            sub.stmt(s)
        if "arguments" in info.refs:
            info.declare("arguments")
        return info

    def stmt(self, s) -> None:
        info = self.info
        if isinstance(s, A.Var):
            for name, init in s.decls:
                info.declare(name)
                info.refs.add(name)
                if init is not None:
                    self.expr(init)
        elif isinstance(s, A.FuncDecl):
            info.declare(s.func.name)
            info.refs.add(s.func.name)
            info.funcdecls.append(s.func)
            self.func(s.func, info)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.If):
            self.expr(s.test)
            self.stmt(s.cons)
            if s.alt is not None:
                self.stmt(s.alt)
        elif isinstance(s, A.While):
            self.expr(s.test)
            self.stmt(s.body)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            if s.test is not None:
                self.expr(s.test)
            if s.update is not None:
                self.expr(s.update)
            self.stmt(s.body)
        elif isinstance(s, A.ForIn):
            if s.declared:
                info.declare(s.name)
            info.refs.add(s.name)
            self.expr(s.obj)
            self.stmt(s.body)
        elif isinstance(s, A.Block):
            for x in s.body:
                self.stmt(x)
        elif isinstance(s, (A.Return, A.Throw)):
            if s.arg is not None:
                self.expr(s.arg)
        elif isinstance(s, A.Try):
            self.stmt(s.block)
            if s.handler is not None:
                info.declare(s.param)
                info.refs.add(s.param)
                self.stmt(s.handler)
            if s.finalizer is not None:
                self.stmt(s.finalizer)
        elif isinstance(s, A.With):
            if info.strict:
                raise _err("with is not allowed in strict code", s)
            info.uses_with = True
            self.expr(s.obj)
            self.stmt(s.body)

    def expr(self, e) -> None:
        if isinstance(e, A.Ident):
            self.info.refs.add(e.name)
        elif isinstance(e, A.Func):
            self.func(e, self.info)
        elif isinstance(e, A.Obj):
            for p in e.props:
                if p.kind == "init":
                    self.expr(p.value)
                else:
                    self.func(p.value, self.info)
        elif isinstance(e, A.Member):
            self.expr(e.obj)
        elif isinstance(e, (A.Call, A.New)):
            if isinstance(e, A.Call) and isinstance(e.callee, A.Ident) and e.callee.name == "eval":
                self.info.eval_calls = True
            self.expr(e.callee)
            for a in e.args:
                self.expr(a)
        elif isinstance(e, A.Unary):
            self.expr(e.arg)
        elif isinstance(e, A.Update):
            self.expr(e.target)
        elif isinstance(e, (A.Binary, A.Logical)):
            self.expr(e.left)
            self.expr(e.right)
        elif isinstance(e, A.Cond):
            self.expr(e.test)
            self.expr(e.cons)
            self.expr(e.alt)
        elif isinstance(e, A.Assign):
            self.expr(e.target)
            self.expr(e.value)


def _all(info: FuncInfo):
    yield info
    for c in info.children:
        yield from _all(c)


def analyze(root: FuncInfo) -> None:
    """Decide which names live in activations and which functions are dynamic."""
    infos = list(_all(root))
    for f in infos:
        # direct eval: the name resolves to the global eval
        if f.eval_calls and f.kind != "eval":
            f.uses_eval = not any("eval" in g.declared for g in f.chain())
        elif f.eval_calls:
            f.uses_eval = True
    for f in infos:
        for name in f.refs:
            if name in f.declared:
                continue
            for g in f.chain():
                if g is f:
                    continue
                if name in g.declared:
                    g.captured.add(name)
                    break
    dynamic_below: set[int] = set()
    for f in infos:
        if f.dynamic:
            for g in f.chain():
                dynamic_below.add(id(g))
    for f in infos:
        if f.kind == "eval":
            f.act_vars = []
            f.has_activation = False
            continue
        if id(f) in dynamic_below:
            f.act_vars = list(f.declared)
        else:
            f.act_vars = [n for n in f.declared if n in f.captured]
        f.has_activation = bool(f.act_vars) or f.uses_eval


# ---------------------------------------------------------------- code generation

class _Label:
    __slots__ = ("pos",)

    def __init__(self) -> None:
        self.pos: int | None = None


@dataclass(eq=False)
class _Cover:
    """One exception-table region, kept as a list of half-open intervals."""

    handler: _Label
    depth: int
    intervals: list[tuple[int, int]] = field(default_factory=list)
    open_at: int | None = None


@dataclass(eq=False)
class _Ctx:
    kind: str  # "loop", "with" or "try"
    brk: _Label | None = None
    cont: _Label | None = None
    covers: list[_Cover] = field(default_factory=list)
    finalizer: A.Block | None = None


class _FunctionCompiler:
    def __init__(self, unit: _Unit, info: FuncInfo) -> None:
        self.unit = unit
        self.info = info
        self.code: list[tuple[str, list]] = []
        self.ctx: list[_Ctx] = []
        self.entries: list[tuple[_Cover, tuple[int, int]]] = []
        self.eval_strict = info.kind == "eval" and info.strict
        self.reg_of: dict[str, int] = {}
        self.act_index = {n: i for i, n in enumerate(info.act_vars)}
        nparams = len(info.params) if info.kind == "func" else 0
        for i, p in enumerate(info.params[:nparams]):
            self.reg_of.setdefault(p, i + 1)
        nxt = nparams + 1
        if info.kind != "eval":
            for n in info.declared:
                if n not in self.act_index and n not in self.reg_of:
                    self.reg_of[n] = nxt
                    nxt += 1
        self.first_temp = nxt
        self.top = nxt
        self.max_reg = nxt

    # ------------------------------------------------ emission helpers

    def emit(self, op: str, *operands) -> int:
        self.code.append((op, list(operands)))
        return len(self.code) - 1

    def label(self) -> _Label:
        return _Label()

    def place(self, lab: _Label) -> None:
        lab.pos = len(self.code)

    def tmp(self) -> int:
        r = self.top
        self.top += 1
        self.max_reg = max(self.max_reg, self.top)
        return r

    def mark(self) -> int:
        return self.top

    def release(self, m: int) -> None:
        self.top = m

    def with_depth(self, upto: int | None = None) -> int:
        ctx = self.ctx if upto is None else self.ctx[:upto]
        return sum(1 for c in ctx if c.kind == "with")

    def scope_depth(self) -> int:
        return (1 if self.info.has_activation else 0) + (1 if self.eval_strict else 0) + self.with_depth()

    # ------------------------------------------------ name resolution

    def resolve(self, name: str):
        skip = 0
        for g in self.info.chain():
            if g.dynamic:
                return ("dynamic", skip)
            if name in g.declared:
                if name in g.act_vars:
                    return ("scoped", g.act_vars.index(name), skip)
                if g is self.info:
                    return ("reg", self.reg_of[name])
                raise AssertionError(f"uncaptured outer variable {name}")
            if g.has_activation:
                skip += 1
        return ("global",)

    def load(self, name: str, dst: int | None = None) -> int:
        where = self.resolve(name)
        if where[0] == "reg":
            if dst is None or dst == where[1]:
                return where[1]
            self.emit("mov", R(dst), R(where[1]))
            return dst
        if dst is None:
            dst = self.tmp()
        if where[0] == "scoped":
            self.emit("get-scoped-var", R(dst), Operand("num", where[1]), Operand("num", where[2]))
        elif where[0] == "global":
            self.emit("resolve-global", R(dst), Operand("id", name))
        elif where[1] > 0:
            self.emit("resolve-skip", R(dst), Operand("id", name), Operand("num", where[1]))
        else:
            self.emit("resolve", R(dst), Operand("id", name))
        return dst

    def store(self, name: str, src: int) -> None:
        where = self.resolve(name)
        if where[0] == "reg":
            if where[1] != src:
                self.emit("mov", R(where[1]), R(src))
        elif where[0] == "scoped":
            self.emit("put-scoped-var", Operand("num", where[1]), Operand("num", where[2]), R(src))
        else:
            m = self.mark()
            base = self.tmp()
            self.emit("resolve-base", R(base), Operand("id", name), Operand("bool", self.info.strict))
            self.emit("put-by-id", R(base), self._prop(name), R(src), Operand("bool", False))
            self.release(m)

    def _prop(self, name: str, node=None) -> Operand:
        if not _PROP_NAME.fullmatch(name):
            raise _err(f"unsupported property name {name!r}", node or self.info.node)
        return Operand("prop", name)

    # ------------------------------------------------ function bodies

    def compile(self) -> CodeBlock:
        info = self.info
        self.emit("enter")
        if info.kind == "func":
            self.emit("create-this", R(0))
        m = self.mark()
        if info.has_activation:
            self.emit("create-activation", R(self.tmp()))
            if info.kind == "func":
                for i, p in enumerate(info.params):
                    if p in self.act_index and info.params.index(p) == i:
                        self.emit("put-scoped-var", Operand("num", self.act_index[p]), Operand("num", 0), R(i + 1))
        self.release(m)
        if info.kind == "func" and "arguments" in info.declared and "arguments" not in info.params:
            r = self.tmp()
            self.emit("create-arguments", R(r))
            self.store("arguments", r)
            self.release(m)
        for fn in info.funcdecls:
            r = self.tmp()
            self.emit("new-func", R(r), Operand("fn", self.unit.name_of(fn)))
            self.store(fn.name, r)
            self.release(m)

        body = info.body
        completion = None
        if info.kind in ("main", "eval") and body and isinstance(body[-1], A.ExprStmt):
            completion = body[-1]
        for s in body:
            if s is completion:
                continue
            self.stmt(s)
        if completion is not None:
            r = self.expr(completion.expr)
        else:
            r = self.tmp()
            self.emit("mov", R(r), Operand("undefined"))
        self.emit("end" if info.kind == "main" else "ret", R(r))
        self.release(m)
        return self.finish()

    def finish(self) -> CodeBlock:
        instructions = []
        for op, operands in self.code:
            ops = tuple(Operand("target", o.pos) if isinstance(o, _Label) else o for o in operands)
            instructions.append(Instruction(op, ops))
        table = []
        for cover, (s, e) in self.entries:
            if s < e:
                table.append(ExceptionEntry(s, e, cover.handler.pos, cover.depth))
        info = self.info
        return CodeBlock(
            name=info.block_name,
            instructions=tuple(instructions),
            register_count=max(self.max_reg, 1),
            arg_count=len(info.params) if info.kind == "func" else 0,
            strict=info.strict,
            exception_table=tuple(table),
            functions=tuple(self.unit.name_of(c.node) for c in info.children),
            variables=tuple(info.declared if info.kind == "eval" else info.act_vars),
        )

    # ------------------------------------------------ statements

    def stmt(self, s) -> None:
        m = self.mark()
        self._stmt(s)
        self.release(m)

    def _stmt(self, s) -> None:
        if isinstance(s, A.Var):
            for name, init in s.decls:
                if init is not None:
                    self.assign_name(name, init)
        elif isinstance(s, A.FuncDecl) or isinstance(s, A.Empty):
            pass
        elif isinstance(s, A.ExprStmt):
            e = s.expr
            if isinstance(e, A.Update) and not e.prefix:
                e = A.Update(e.op, True, e.target, pos=e.pos)
            self.expr(e)
        elif isinstance(s, A.Block):
            for x in s.body:
                self.stmt(x)
        elif isinstance(s, A.If):
            c = self.expr(s.test)
            els, end = self.label(), self.label()
            self.emit("jfalse", R(c), els)
            self.stmt(s.cons)
            if s.alt is not None:
                self.emit("jmp", end)
                self.place(els)
                self.stmt(s.alt)
                self.place(end)
            else:
                self.place(els)
        elif isinstance(s, A.While):
            self.loop(None, s.test, None, s.body)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            self.loop(None, s.test, s.update, s.body)
        elif isinstance(s, A.ForIn):
            self.for_in(s)
        elif isinstance(s, A.Return):
            if s.arg is not None:
                r = self.expr(s.arg)
                if self._is_var_reg(r):
                    t = self.tmp()
                    self.emit("mov", R(t), R(r))
                    r = t
            else:
                r = self.tmp()
                self.emit("mov", R(r), Operand("undefined"))
            self.exit_to(0, ("ret", r))
        elif isinstance(s, (A.Break, A.Continue)):
            for level in range(len(self.ctx) - 1, -1, -1):
                c = self.ctx[level]
                if c.kind == "loop":
                    self.exit_to(level + 1, ("jmp", c.brk if isinstance(s, A.Break) else c.cont))
                    return
            raise _err("break or continue outside of a loop", s)
        elif isinstance(s, A.Throw):
            r = self.expr(s.arg)
            self.emit("throw", R(r))
        elif isinstance(s, A.Try):
            self.try_stmt(s)
        elif isinstance(s, A.With):
            r = self.expr(s.obj)
            self.emit("push-scope", R(r))
            self.ctx.append(_Ctx("with"))
            self.stmt(s.body)
            self.ctx.pop()
            self.emit("pop-scope")
        else:
            raise _err(f"unsupported statement {type(s).__name__}", s)

    def _is_var_reg(self, r: int) -> bool:
        return r < self.first_temp

    def _simple_less(self, test):
        """Operands for a bottom-tested loop, when the test is a side-effect-free ``a < b``."""
        if not (isinstance(test, A.Binary) and test.op == "<"):
            return None
        for side in (test.left, test.right):
            if isinstance(side, A.Num):
                continue
            if isinstance(side, A.Ident) and self.resolve(side.name)[0] == "reg":
                continue
            return None
        return test.left, test.right

    def loop(self, _init, test, update, body) -> None:
        brk, cont = self.label(), self.label()
        less = self._simple_less(test) if test is not None else None
        self.ctx.append(_Ctx("loop", brk, cont))
        if less is not None:
            top, check = self.label(), self.label()
            self.emit("jmp", check)
            self.place(top)
            self.stmt(body)
            self.place(cont)
            if update is not None:
                self.stmt(A.ExprStmt(update, pos=update.pos))
            self.place(check)
            m = self.mark()
            a = self.expr(less[0])
            b = self.expr(less[1])
            self.ctx.pop()
            self.emit("loop-if-less", R(a), R(b), top)
            self.release(m)
            self.place(brk)
            return
        top = self.label()
        self.place(top)
        if test is not None and not self._always_true(test):
            m = self.mark()
            c = self.expr(test)
            self.emit("jfalse", R(c), brk)
            self.release(m)
        self.stmt(body)
        self.place(cont)
        if update is not None:
            self.stmt(A.ExprStmt(update, pos=update.pos))
        self.ctx.pop()
        self.emit("jmp", top)
        self.place(brk)

    @staticmethod
    def _always_true(e) -> bool:
        return (isinstance(e, A.Num) and e.value != 0) or (isinstance(e, A.Bool) and e.value)

    def for_in(self, s: A.ForIn) -> None:
        base = self.expr(s.obj)
        if self._is_var_reg(base):
            t = self.tmp()
            self.emit("mov", R(t), R(base))
            base = t
        it, i, size, key = self.tmp(), self.tmp(), self.tmp(), self.tmp()
        brk, cont, body = self.label(), self.label(), self.label()
        self.emit("get-pnames", R(it), R(base), R(i), R(size), brk)
        self.emit("jmp", cont)
        self.place(body)
        self.ctx.append(_Ctx("loop", brk, cont))
        self.store(s.name, key)
        self.stmt(s.body)
        self.ctx.pop()
        self.place(cont)
        self.emit("next-pname", R(key), R(base), R(i), R(size), R(it), body)
        self.place(brk)

    # ------------------------------------------------ exits and try

    def _open(self, cover: _Cover) -> None:
        cover.open_at = len(self.code)

    def _close(self, cover: _Cover) -> None:
        if cover.open_at is not None:
            if cover.open_at < len(self.code):
                cover.intervals.append((cover.open_at, len(self.code)))
            cover.open_at = None

    def exit_to(self, level: int, final) -> None:
        """Leave every context above ``level``, running finally copies on the way."""
        saved = self.ctx
        suspended: list[_Cover] = []
        pops = 0
        for k in range(len(saved) - 1, level - 1, -1):
            c = saved[k]
            if c.kind == "with":
                pops += 1
            elif c.kind == "try":
                for cover in c.covers:
                    if cover.open_at is not None:
                        self._close(cover)
                        suspended.append(cover)
                if c.finalizer is not None:
                    for _ in range(pops):
                        self.emit("pop-scope")
                    pops = 0
                    self.ctx = saved[:k]
                    self.stmt(c.finalizer)
                    self.ctx = saved
        op, arg = final
        if op == "ret":
            self.emit("ret", R(arg))
        elif pops:
            self.emit("jmp-scope", Operand("num", pops), arg)
        else:
            self.emit("jmp", arg)
        for cover in suspended:
            self._open(cover)

    def try_stmt(self, s: A.Try) -> None:
        depth = self.scope_depth()
        after = self.label()
        catch_cover = _Cover(self.label(), depth) if s.handler is not None else None
        final_cover = _Cover(self.label(), depth) if s.finalizer is not None else None
        entry = _Ctx("try", finalizer=s.finalizer)
        entry.covers = [c for c in (catch_cover, final_cover) if c is not None]
        for c in entry.covers:
            self._open(c)
        self.ctx.append(entry)
        self.stmt(s.block)
        self.ctx.pop()
        for c in entry.covers:
            self._close(c)
        if s.finalizer is not None:
            self.stmt(s.finalizer)
        self.emit("jmp", after)

        if catch_cover is not None:
            self.place(catch_cover.handler)
            m = self.mark()
            where = self.resolve(s.param)
            if where[0] == "reg":
                self.emit("catch", R(where[1]))
            else:
                r = self.tmp()
                self.emit("catch", R(r))
                self.store(s.param, r)
            self.release(m)
            if final_cover is not None:
                entry.covers = [final_cover]
                self._open(final_cover)
                self.ctx.append(entry)
            self.stmt(s.handler)
            if final_cover is not None:
                self.ctx.pop()
                self._close(final_cover)
                self.stmt(s.finalizer)
            self.emit("jmp", after)

        if final_cover is not None:
            self.place(final_cover.handler)
            m = self.mark()
            r = self.tmp()
            self.emit("catch", R(r))
            self.stmt(s.finalizer)
            self.emit("throw", R(r))
            self.release(m)

        for c in (catch_cover, final_cover):
            if c is not None:
                for iv in c.intervals:
                    self.entries.append((c, iv))
        self.place(after)

    # ------------------------------------------------ expressions

    def assign_name(self, name: str, value) -> int:
        where = self.resolve(name)
        if where[0] == "reg" and _direct(value):
            return self.expr(value, where[1])
        r = self.expr(value)
        self.store(name, r)
        return r

    def expr(self, e, dst: int | None = None) -> int:
        """Evaluate ``e``; the result is in ``dst`` when given, else in the returned register."""
        if isinstance(e, (A.Num, A.Str, A.Bool, A.Null, A.Undef)):
            r = self.tmp() if dst is None else dst
            if isinstance(e, A.Null):
                self.emit("mov", R(r), Operand("null"))
            elif isinstance(e, A.Undef):
                self.emit("mov", R(r), Operand("undefined"))
            else:
                self.emit("mov", R(r), _const(e.value))
            return r
        if isinstance(e, A.This):
            if dst is None:
                return 0
            self.emit("mov", R(dst), R(0))
            return dst
        if isinstance(e, A.Ident):
            if e.name == "NaN" and self.resolve("NaN")[0] == "global":
                r = self.tmp() if dst is None else dst
                self.emit("mov", R(r), Operand("num", float("nan")))
                return r
            return self.load(e.name, dst)
        if isinstance(e, A.Func):
            r = self.tmp() if dst is None else dst
            self.emit("new-func", R(r), Operand("fn", self.unit.name_of(e)))
            return r
        if isinstance(e, A.Obj):
            return self.obj_literal(e, dst)
        if isinstance(e, A.Member):
            o = self.expr(e.obj)
            r = self.tmp() if dst is None else dst
            self.emit("get-by-id", R(r), R(o), self._prop(e.prop, e))
            return r
        if isinstance(e, (A.Call, A.New)):
            return self.call(e, dst)
        if isinstance(e, A.Unary):
            return self.unary(e, dst)
        if isinstance(e, A.Update):
            return self.update(e, dst)
        if isinstance(e, A.Binary):
            return self.binary(e, dst)
        if isinstance(e, A.Logical):
            r = self.tmp() if dst is None else dst
            end = self.label()
            self.expr(e.left, r)
            if e.op == "&&":
                self.emit("jfalse", R(r), end)
            else:
                m = self.mark()
                n = self.tmp()
                self.emit("prim", R(n), Operand("op", "not"), R(r))
                self.emit("jfalse", R(n), end)
                self.release(m)
            self.expr(e.right, r)
            self.place(end)
            return r
        if isinstance(e, A.Cond):
            r = self.tmp() if dst is None else dst
            alt, end = self.label(), self.label()
            m = self.mark()
            c = self.expr(e.test)
            self.emit("jfalse", R(c), alt)
            self.release(m)
            self.expr(e.cons, r)
            self.emit("jmp", end)
            self.place(alt)
            self.expr(e.alt, r)
            self.place(end)
            return r
        if isinstance(e, A.Assign):
            return self.assign(e, dst)
        raise _err(f"unsupported expression {type(e).__name__}", e)

    def _move(self, r: int, dst: int | None) -> int:
        if dst is None or dst == r:
            return r
        self.emit("mov", R(dst), R(r))
        return dst

    def _operand(self, e, later) -> int:
        """Evaluate an operand that must survive evaluation of ``later``."""
        r = self.expr(e)
        if self._is_var_reg(r) and any(_writes_regs(x) for x in later):
            t = self.tmp()
            self.emit("mov", R(t), R(r))
            r = t
        return r

    def binary(self, e: A.Binary, dst: int | None) -> int:
        if e.op == "instanceof":
            a = self._operand(e.left, [e.right])
            b = self.expr(e.right)
            p = self.tmp()
            self.emit("get-by-id", R(p), R(b), Operand("prop", "prototype"))
            r = self.tmp() if dst is None else dst
            self.emit("instanceof", R(r), R(a), R(p))
            return r
        tag = BINARY_TAGS.get(e.op)
        if tag is None:
            raise _err(f"unsupported operator {e.op}", e)
        a = self._operand(e.left, [e.right])
        b = self.expr(e.right)
        r = self.tmp() if dst is None else dst
        self.emit("prim", R(r), Operand("op", tag), R(a), R(b))
        return r

    def unary(self, e: A.Unary, dst: int | None) -> int:
        if e.op == "typeof":
            if isinstance(e.arg, A.Ident) and self.resolve(e.arg.name)[0] == "dynamic":
                # typeof must not throw for unbound names
                b = self.tmp()
                self.emit("resolve-base", R(b), Operand("id", e.arg.name), Operand("bool", False))
                v = self.tmp()
                self.emit("get-by-id", R(v), R(b), self._prop(e.arg.name, e))
            else:
                v = self.expr(e.arg)
            r = self.tmp() if dst is None else dst
            self.emit("typeof", R(r), R(v))
            return r
        if e.op == "delete":
            o = self.expr(e.arg.obj)
            r = self.tmp() if dst is None else dst
            self.emit("del-by-id", R(r), R(o), self._prop(e.arg.prop, e))
            return r
        if e.op == "void":
            self.expr(e.arg)
            r = self.tmp() if dst is None else dst
            self.emit("mov", R(r), Operand("undefined"))
            return r
        a = self.expr(e.arg)
        r = self.tmp() if dst is None else dst
        self.emit("prim", R(r), Operand("op", UNARY_TAGS[e.op]), R(a))
        return r

    def update(self, e: A.Update, dst: int | None) -> int:
        tag = "inc" if e.op == "++" else "dec"
        t = e.target
        if isinstance(t, A.Ident):
            where = self.resolve(t.name)
            old = self.load(t.name)
            if e.prefix:
                if where[0] == "reg":
                    self.emit("prim", R(old), Operand("op", tag), R(old))
                    return self._move(old, dst)
                self.emit("prim", R(old), Operand("op", tag), R(old))
                self.store(t.name, old)
                return self._move(old, dst)
            num = self.tmp() if dst is None else dst
            self.emit("prim", R(num), Operand("op", "to-number"), R(old))
            if where[0] == "reg":
                self.emit("prim", R(old), Operand("op", tag), R(num))
            else:
                n2 = self.tmp()
                self.emit("prim", R(n2), Operand("op", tag), R(num))
                self.store(t.name, n2)
            return num
        o = self.expr(t.obj)
        prop = self._prop(t.prop, t)
        old = self.tmp()
        self.emit("get-by-id", R(old), R(o), prop)
        num = self.tmp()
        self.emit("prim", R(num), Operand("op", "to-number"), R(old))
        new = self.tmp()
        self.emit("prim", R(new), Operand("op", tag), R(num))
        self.emit("put-by-id", R(o), prop, R(new), Operand("bool", False))
        return self._move(new if e.prefix else num, dst)

    def assign(self, e: A.Assign, dst: int | None) -> int:
        t = e.target
        if isinstance(t, A.Ident):
            if e.op == "=":
                return self._move(self.assign_name(t.name, e.value), dst)
            tag = BINARY_TAGS[e.op[:-1]]
            where = self.resolve(t.name)
            old = self._operand(t, [e.value])
            v = self.expr(e.value)
            if where[0] == "reg":
                self.emit("prim", R(where[1]), Operand("op", tag), R(old), R(v))
                return self._move(where[1], dst)
            r = self.tmp()
            self.emit("prim", R(r), Operand("op", tag), R(old), R(v))
            self.store(t.name, r)
            return self._move(r, dst)
        o = self._operand(t.obj, [e.value])
        prop = self._prop(t.prop, t)
        if e.op == "=":
            v = self.expr(e.value)
        else:
            old = self.tmp()
            self.emit("get-by-id", R(old), R(o), prop)
            rhs = self.expr(e.value)
            v = self.tmp()
            self.emit("prim", R(v), Operand("op", BINARY_TAGS[e.op[:-1]]), R(old), R(rhs))
        self.emit("put-by-id", R(o), prop, R(v), Operand("bool", False))
        return self._move(v, dst)

    def obj_literal(self, e: A.Obj, dst: int | None) -> int:
        o = self.tmp()
        self.emit("new-object", R(o))
        accessors: dict[str, list] = {}
        for p in e.props:
            m = self.mark()
            prop = self._prop(p.key, p)
            if p.kind == "init":
                v = self.expr(p.value)
                self.emit("put-by-id", R(o), prop, R(v), Operand("bool", True))
            else:
                f = self.tmp()
                self.emit("new-func", R(f), Operand("fn", self.unit.name_of(p.value)))
                u = self.tmp()
                self.emit("mov", R(u), Operand("undefined"))
                g, s = (f, u) if p.kind == "get" else (u, f)
                self.emit("put-getter-setter", R(o), prop, R(g), R(s))
            self.release(m)
        return self._move(o, dst)

    def call(self, e, dst: int | None) -> int:
        argc = len(e.args)
        rf = self.tmp()
        rb = self.tmp()
        args = [self.tmp() for _ in range(argc)]
        op = "construct" if isinstance(e, A.New) else "call"
        callee = e.callee
        if op == "call" and isinstance(callee, A.Member):
            self.expr(callee.obj, rb)
            self.emit("get-by-id", R(rf), R(rb), self._prop(callee.prop, callee))
        elif op == "call" and isinstance(callee, A.Ident) and self.resolve(callee.name)[0] == "dynamic":
            self.emit("resolve-with-base", R(rb), R(rf), Operand("id", callee.name))
            if callee.name == "eval" and self.info.uses_eval:
                op = "call-eval"
        else:
            self.expr(callee, rf)
            self.emit("mov", R(rb), Operand("undefined"))
        for a, r in zip(e.args, args):
            self.expr(a, r)
        self.emit(op, R(rf), Operand("num", argc), R(rb))
        self.emit("call-put-result", R(rf))
        self.release(rf + 1)
        return self._move(rf, dst)


def _direct(e) -> bool:
    """Expressions whose only write to a destination register is their last instruction."""
    return isinstance(e, (A.Num, A.Str, A.Bool, A.Null, A.Undef, A.This, A.Ident,
                          A.Binary, A.Unary, A.Call, A.New, A.Member, A.Func))


def _writes_regs(e) -> bool:
    """True when evaluating ``e`` may assign a variable of the current function."""
    if isinstance(e, (A.Assign, A.Update)):
        return True
    if isinstance(e, A.Func) or e is None:
        return False
    if isinstance(e, A.Obj):
        return any(p.kind == "init" and _writes_regs(p.value) for p in e.props)
    if isinstance(e, A.Member):
        return _writes_regs(e.obj)
    if isinstance(e, (A.Call, A.New)):
        return _writes_regs(e.callee) or any(_writes_regs(a) for a in e.args)
    if isinstance(e, A.Unary):
        return _writes_regs(e.arg)
    if isinstance(e, (A.Binary, A.Logical)):
        return _writes_regs(e.left) or _writes_regs(e.right)
    if isinstance(e, A.Cond):
        return _writes_regs(e.test) or _writes_regs(e.cons) or _writes_regs(e.alt)
    return False


# ---------------------------------------------------------------- compilation units

class _Unit:
    """Assigns block names and compiles every function of one source text."""

    def __init__(self, prefix: str | None) -> None:
        self.prefix = prefix
        self.names: dict[int, str] = {}
        self.used: set[str] = set()

    def name_of(self, fn) -> str:
        return self.names[id(fn)]

    def assign_names(self, root: FuncInfo) -> None:
        for f in _all(root):
            if f is root:
                base = self.prefix or "main"
            else:
                stem = f.node.name or "anon"
                base = f"{self.prefix}.{stem}" if self.prefix else stem
            name = base
            k = 2
            while name in self.used:
                name = f"{base}.{k}"
                k += 1
            self.used.add(name)
            self.names[id(f.node)] = name
            f.block_name = name

    def compile(self, root: FuncInfo) -> list[CodeBlock]:
        analyze(root)
        self.assign_names(root)
        return [_FunctionCompiler(self, f).compile() for f in _all(root)]


def _root(tree: A.Program, kind: str, strict: bool) -> FuncInfo:
    info = FuncInfo(tree, None, kind, strict or tree.strict, [], tree.body)
    infos: dict[int, FuncInfo] = {}
    _Collector(info, infos).stmt(A.Block(tree.body))
    return info


def compile_program(source: str, strict: bool = False) -> Program:
    """Compile a whole program; the entry block is named ``main``."""
    tree = parse(source)
    root = _root(tree, "main", strict)
    return Program(tuple(_Unit(None).compile(root)))


def compile_eval(source: str, strict: bool = False, prefix: str = "eval") -> tuple[list[CodeBlock], bool]:
    """Compile eval code; returns its blocks (root first) and whether it runs strict."""
    tree = parse(source)
    root = _root(tree, "eval", strict)
    return _Unit(prefix).compile(root), root.strict
