"""Syntax tree for the small source language. Positions do not take part in equality."""

from __future__ import annotations

from dataclasses import dataclass, field


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass
class Node:
    pos: tuple[int, int] | None = _pos()


# ---------------------------------------------------------------- expressions

@dataclass
class Num(Node):
    value: int | float


@dataclass
class Str(Node):
    value: str


@dataclass
class Bool(Node):
    value: bool


@dataclass
class Null(Node):
    pass


@dataclass
class Undef(Node):
    pass


@dataclass
class This(Node):
    pass


@dataclass
class Ident(Node):
    name: str


@dataclass
class Prop(Node):
    kind: str  # "init", "get" or "set"
    key: str
    value: Node


@dataclass
class Obj(Node):
    props: list[Prop]


@dataclass
class Func(Node):
    name: str | None
    params: list[str]
    body: list[Node]
    strict: bool = False


@dataclass
class Member(Node):
    obj: Node
    prop: str
    computed: bool = False


@dataclass
class Call(Node):
    callee: Node
    args: list[Node]


@dataclass
class New(Node):
    callee: Node
    args: list[Node]


@dataclass
class Unary(Node):
    op: str
    arg: Node


@dataclass
class Update(Node):
    op: str  # "++" or "--"
    prefix: bool
    target: Node


@dataclass
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class Logical(Node):
    op: str  # "&&" or "||"
    left: Node
    right: Node


@dataclass
class Cond(Node):
    test: Node
    cons: Node
    alt: Node


@dataclass
class Assign(Node):
    op: str  # "=", "+=", ...
    target: Node
    value: Node


# ---------------------------------------------------------------- statements

@dataclass
class Var(Node):
    decls: list[tuple[str, Node | None]]


@dataclass
class FuncDecl(Node):
    func: Func


@dataclass
class ExprStmt(Node):
    expr: Node


@dataclass
class If(Node):
    test: Node
    cons: Node
    alt: Node | None = None


@dataclass
class While(Node):
    test: Node
    body: Node


@dataclass
class For(Node):
    init: Node | None
    test: Node | None
    update: Node | None
    body: Node


@dataclass
class ForIn(Node):
    name: str
    declared: bool
    obj: Node
    body: Node


@dataclass
class Block(Node):
    body: list[Node]


@dataclass
class Return(Node):
    arg: Node | None = None


@dataclass
class Break(Node):
    pass


@dataclass
class Continue(Node):
    pass


@dataclass
class Throw(Node):
    arg: Node


@dataclass
class Try(Node):
    block: Block
    param: str | None
    handler: Block | None
    finalizer: Block | None


@dataclass
class With(Node):
    obj: Node
    body: Node


@dataclass
class Empty(Node):
    pass


@dataclass
class Program(Node):
    body: list[Node]
    strict: bool = False
