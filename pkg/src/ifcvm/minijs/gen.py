"""Random terminating programs for property tests.

Loops are counted ``for`` loops whose counters are never assigned in the body,
``while (true)`` loops that always reach a ``break`` and never ``continue``,
and for-in loops. A
function may only call functions declared before it, and accessors call no
functions, so there is no recursion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import ast as A
from .parser import to_source

PROPS = ("a", "b", "c")
OBJECTS = ("o0", "o1")
GLOBALS = ("g0", "g1", "g2")
BIN_OPS = ("+", "-", "*", "<", "<=", "==", "===", "!=", "&", "|", "%")


@dataclass
class _Scope:
    in_function: bool = False
    loops: list[str] = field(default_factory=list)  # innermost last
    locals: list[str] = field(default_factory=list)
    callable: list[tuple[str, int]] = field(default_factory=list)  # (name, arity)
    counters: set[str] = field(default_factory=set)


class ProgramGenerator:
    def __init__(self, seed: int, max_depth: int = 3, max_stmts: int = 3) -> None:
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.max_stmts = max_stmts
        self.counter_id = 0
        self.scope = _Scope()

    # ------------------------------------------------ helpers

    def chance(self, p: float) -> bool:
        return self.rng.random() < p

    def pick(self, seq):
        return self.rng.choice(list(seq))

    def readable(self) -> list[str]:
        return ["h", "l", *GLOBALS, *self.scope.locals, *sorted(self.scope.counters)]

    def writable(self) -> list[str]:
        return [*GLOBALS, *self.scope.locals]

    # ------------------------------------------------ expressions

    def expr(self, depth: int = 0):
        r = self.rng.random()
        if depth >= 2 or r < 0.3:
            return self.atom()
        if r < 0.5:
            return A.Binary(self.pick(BIN_OPS), self.expr(depth + 1), self.expr(depth + 1))
        if r < 0.58:
            return A.Unary(self.pick(("!", "-", "typeof")), self.expr(depth + 1))
        if r < 0.66:
            return A.Logical(self.pick(("&&", "||")), self.expr(depth + 1), self.expr(depth + 1))
        if r < 0.72:
            return A.Cond(self.expr(depth + 1), self.expr(depth + 1), self.expr(depth + 1))
        if r < 0.84:
            return A.Member(A.Ident(self.pick(OBJECTS)), self.pick(PROPS + ("v",)))
        if r < 0.95 and self.scope.callable:
            name, arity = self.pick(self.scope.callable)
            return A.Call(A.Ident(name), [self.expr(depth + 1) for _ in range(arity)])
        return A.Obj([A.Prop("init", p, self.expr(depth + 1)) for p in self.rng.sample(PROPS, 2)])

    def atom(self):
        r = self.rng.random()
        if r < 0.35:
            return A.Num(self.rng.randint(0, 3))
        if r < 0.42:
            return A.Str(self.pick(("x", "y", "")))
        if r < 0.47:
            return A.Bool(self.chance(0.5))
        return A.Ident(self.pick(self.readable()))

    # ------------------------------------------------ statements

    def block(self, depth: int) -> A.Block:
        n = self.rng.randint(1, self.max_stmts)
        return A.Block([self.stmt(depth + 1) for _ in range(n)])

    def stmt(self, depth: int):
        s = self.scope
        if depth >= self.max_depth:
            return self.simple()
        kinds = ["assign", "assign", "member", "if", "if", "for", "try", "with", "forin", "while", "eval", "delete"]
        if s.in_function:
            kinds.append("return")
        if s.loops:
            kinds.append("break")
            if s.loops[-1] != "while":
                kinds.append("continue")
        if self.chance(0.3):
            kinds.append("throw")
        k = self.pick(kinds)
        if k == "if":
            alt = self.block(depth) if self.chance(0.4) else None
            return A.If(self.expr(), self.block(depth), alt)
        if k == "for":
            c = f"i{self.counter_id}"
            self.counter_id += 1
            bound = A.Num(self.rng.randint(0, 3)) if self.chance(0.7) else A.Ident("l")
            s.counters.add(c)
            s.loops.append("for")
            body = self.block(depth)
            s.loops.pop()
            s.counters.discard(c)
            if s.in_function:
                s.locals.append(c)
            return A.For(A.Var([(c, A.Num(0))]), A.Binary("<", A.Ident(c), bound),
                         A.Update("++", False, A.Ident(c)), body)
        if k == "while":
            s.loops.append("while")
            body = self.block(depth)
            s.loops.pop()
            body.body.append(A.Break())
            return A.While(A.Bool(True), body)
        if k == "forin":
            name = self.pick(self.writable())
            s.loops.append("forin")
            body = self.block(depth)
            s.loops.pop()
            return A.ForIn(name, False, A.Ident(self.pick(OBJECTS)), body)
        if k == "try":
            r = self.rng.random()
            handler = self.block(depth) if r < 0.75 else None
            finalizer = self.block(depth) if r >= 0.5 else None
            return A.Try(self.block(depth), "e" if handler else None, handler, finalizer)
        if k == "with":
            return A.With(A.Ident(self.pick(OBJECTS)), self.block(depth))
        if k == "eval":
            return self.eval_stmt()
        if k == "delete":
            return A.ExprStmt(A.Unary("delete", A.Member(A.Ident(self.pick(OBJECTS)), self.pick(PROPS))))
        if k == "return":
            return A.Return(self.expr() if self.chance(0.7) else None)
        if k == "break":
            return A.Break()
        if k == "continue":
            return A.Continue()
        if k == "throw":
            return A.Throw(self.expr())
        if k == "member":
            return A.ExprStmt(A.Assign("=", A.Member(A.Ident(self.pick(OBJECTS)), self.pick(PROPS)), self.expr()))
        return self.simple()

    def simple(self):
        if self.chance(0.75):
            op = self.pick(("=", "=", "+="))
            return A.ExprStmt(A.Assign(op, A.Ident(self.pick(self.writable())), self.expr()))
        return A.ExprStmt(A.Assign("=", A.Member(A.Ident(self.pick(OBJECTS)), self.pick(PROPS)), self.expr()))

    def eval_stmt(self):
        saved = self.scope
        # eval code sees the same names but never calls functions or returns
        self.scope = _Scope(locals=list(saved.locals))
        code = to_source(A.Program([self.stmt(self.max_depth - 1) for _ in range(self.rng.randint(1, 2))]))
        self.scope = saved
        return A.ExprStmt(A.Call(A.Ident("eval"), [A.Str(code)]))

    # ------------------------------------------------ programs

    def function(self, name: str) -> A.FuncDecl:
        arity = self.rng.randint(0, 2)
        params = [f"p{i}" for i in range(arity)]
        saved = self.scope
        self.scope = _Scope(True, [], [*params, "t"], list(saved.callable))
        body = [A.Var([("t", self.expr())])]
        body += [self.stmt(1) for _ in range(self.rng.randint(1, self.max_stmts))]
        body.append(A.Return(A.Ident("t")))
        self.scope = saved
        self.scope.callable.append((name, arity))
        return A.FuncDecl(A.Func(name, params, body))

    def program(self) -> A.Program:
        body = []
        for g in GLOBALS:
            body.append(A.ExprStmt(A.Assign("=", A.Ident(g), A.Num(0))))
        for o in OBJECTS:
            props = [A.Prop("init", p, self.atom()) for p in PROPS[:2]]
            if self.chance(0.3):
                props.append(A.Prop("get", "v", A.Func(None, [], [A.Return(self.atom())])))
            body.append(A.ExprStmt(A.Assign("=", A.Ident(o), A.Obj(props))))
        for i in range(self.rng.randint(0, 2)):
            body.append(self.function(f"f{i}"))
        body += [self.stmt(0) for _ in range(self.rng.randint(2, self.max_stmts + 2))]
        return A.Program(body)


def random_program(seed: int, max_depth: int = 3) -> A.Program:
    return ProgramGenerator(seed, max_depth).program()


def random_source(seed: int, max_depth: int = 3) -> str:
    return to_source(random_program(seed, max_depth))
