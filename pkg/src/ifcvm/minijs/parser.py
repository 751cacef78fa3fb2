"""Lexer, recursive-descent parser, and pretty-printer for the source language."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from . import ast as A


class MiniJSError(SyntaxError):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


KEYWORDS = frozenset({
    "var", "function", "if", "else", "while", "for", "in", "break", "continue",
    "return", "throw", "try", "catch", "finally", "with", "new", "delete",
    "typeof", "instanceof", "this", "true", "false", "null", "undefined", "void", "do",
})

PUNCTUATORS = sorted(
    """>>>= >>> === !== <<= >>= == != <= >= << >> && || ++ -- += -= *= /= %= &= |= ^=
    { } ( ) [ ] ; , . ? : = + - * / % < > ! ~ & | ^""".split(),
    key=len,
    reverse=True,
)
_SPACE_RE = re.compile(r"[ \t\r\f\v\n]+")
_PUNCT_RE = re.compile("|".join(map(re.escape, PUNCTUATORS)))


@dataclass(frozen=True)
class Token:
    kind: str  # num, str, ident, kw, punct, eof
    value: object
    line: int
    col: int
    nl_before: bool


_NUM_RE = re.compile(r"0[xX][0-9a-fA-F]+|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_$][\w$]*")
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v", "0": "\0"}


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line, col = 1, 1
    nl = False
    n = len(src)

    def advance(k: int) -> None:
        nonlocal i, line, col
        breaks = src.count("\n", i, i + k)
        if breaks:
            line += breaks
            col = i + k - src.rfind("\n", i, i + k)
        else:
            col += k
        i += k

    while i < n:
        ch = src[i]
        if ch in " \t\r\f\v\n":
            j = _SPACE_RE.match(src, i).end()
            if src.count("\n", i, j):
                nl = True
            advance(j - i)
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            advance((j if j >= 0 else n) - i)
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j < 0:
                raise MiniJSError("unterminated comment", line, col)
            if "\n" in src[i:j]:
                nl = True
            advance(j + 2 - i)
            continue
        start_line, start_col = line, col
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM_RE.match(src, i)
            text = m.group(0)
            if text[:2] in ("0x", "0X"):
                value = int(text, 16)
            elif re.fullmatch(r"\d+", text):
                value = int(text)
            else:
                value = float(text)
                if value.is_integer() and abs(value) < 2**53:
                    value = int(value)
            if m.end() < n and (src[m.end()].isalnum() or src[m.end()] == "_"):
                raise MiniJSError("bad number literal", start_line, start_col)
            toks.append(Token("num", value, start_line, start_col, nl))
            advance(len(text))
        elif ch in "\"'":
            j = i + 1
            out = []
            while True:
                if j >= n or src[j] == "\n":
                    raise MiniJSError("unterminated string", start_line, start_col)
                c = src[j]
                if c == ch:
                    break
                if c == "\\":
                    j += 1
                    if j >= n:
                        raise MiniJSError("unterminated string", start_line, start_col)
                    e = src[j]
                    if e == "u":
                        hexd = src[j + 1:j + 5]
                        if not re.fullmatch(r"[0-9a-fA-F]{4}", hexd):
                            raise MiniJSError("bad unicode escape", start_line, start_col)
                        out.append(chr(int(hexd, 16)))
                        j += 4
                    elif e == "x":
                        hexd = src[j + 1:j + 3]
                        if not re.fullmatch(r"[0-9a-fA-F]{2}", hexd):
                            raise MiniJSError("bad hex escape", start_line, start_col)
                        out.append(chr(int(hexd, 16)))
                        j += 2
                    else:
                        out.append(_ESCAPES.get(e, e))
                else:
                    out.append(c)
                j += 1
            toks.append(Token("str", "".join(out), start_line, start_col, nl))
            advance(j + 1 - i)
        elif ch.isalpha() or ch in "_$":
            m = _IDENT_RE.match(src, i)
            word = m.group(0)
            toks.append(Token("kw" if word in KEYWORDS else "ident", word, start_line, start_col, nl))
            advance(len(word))
        else:
            m = _PUNCT_RE.match(src, i)
            if m is None:
                raise MiniJSError(f"unexpected character {ch!r}", start_line, start_col)
            toks.append(Token("punct", m.group(0), start_line, start_col, nl))
            advance(m.end() - i)
        nl = False
    toks.append(Token("eof", None, line, col, True))
    return toks


_BINARY_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!=", "===", "!=="),
    ("<", "<=", ">", ">=", "instanceof"),
    ("<<", ">>", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
]
_BINARY_LEVEL = {op: i for i, ops in enumerate(_BINARY_PRECEDENCE) for op in ops}
_ASSIGN_OPS = {"=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", ">>>=", "&=", "|=", "^="}


class Parser:
    def __init__(self, src: str) -> None:
        self.toks = tokenize(src)
        self.i = 0
        self.in_function = 0
        self.loop_depth = 0

    # -------------------------------------------------------- helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise MiniJSError(msg, t.line, t.col)

    def at(self, value, kind: str | None = None) -> bool:
        t = self.tok
        if kind is not None and t.kind != kind:
            return False
        return t.value == value and t.kind in ("punct", "kw")

    def eat(self, value) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value) -> Token:
        if not self.at(value):
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.value)
            self.error(f"expected {value!r}, found {found}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.value!r}")
        name = self.tok.value
        self.i += 1
        return name

    def semicolon(self) -> None:
        if self.eat(";"):
            return
        if self.at("}") or self.tok.kind == "eof" or self.tok.nl_before:
            return
        self.error(f"expected ';', found {self.tok.value!r}")

    def pos(self) -> tuple[int, int]:
        return (self.tok.line, self.tok.col)

    # -------------------------------------------------------- statements

    def parse_program(self) -> A.Program:
        pos = self.pos()
        strict = self._directive()
        body = []
        while self.tok.kind != "eof":
            body.append(self.statement())
        return A.Program(body, strict, pos=pos)

    def _directive(self) -> bool:
        t = self.tok
        if t.kind == "str" and t.value == "use strict":
            nxt = self.peek()
            if nxt.value == ";" or nxt.nl_before or nxt.kind == "eof" or nxt.value == "}":
                self.i += 1
                self.eat(";")
                return True
        return False

    def block(self) -> A.Block:
        pos = self.pos()
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}' before end of input")
            body.append(self.statement())
        self.expect("}")
        return A.Block(body, pos=pos)

    def statement(self):
        t = self.tok
        pos = self.pos()
        if t.kind == "punct":
            if t.value == "{":
                return self.block()
            if t.value == ";":
                self.i += 1
                return A.Empty(pos=pos)
        if t.kind == "kw":
            kw = t.value
            if kw == "var":
                self.i += 1
                node = self.var_decls(pos)
                self.semicolon()
                return node
            if kw == "function":
                self.i += 1
                func = self.function_rest(pos, require_name=True)
                return A.FuncDecl(func, pos=pos)
            if kw == "if":
                self.i += 1
                self.expect("(")
                test = self.expression()
                self.expect(")")
                cons = self.statement()
                alt = self.statement() if self.eat("else") else None
                return A.If(test, cons, alt, pos=pos)
            if kw == "while":
                self.i += 1
                self.expect("(")
                test = self.expression()
                self.expect(")")
                return A.While(test, self.loop_body(), pos=pos)
            if kw == "for":
                self.i += 1
                return self.for_statement(pos)
            if kw in ("break", "continue"):
                self.i += 1
                if self.loop_depth == 0:
                    self.error(f"'{kw}' outside of a loop", t)
                self.semicolon()
                return A.Break(pos=pos) if kw == "break" else A.Continue(pos=pos)
            if kw == "return":
                self.i += 1
                if not self.in_function:
                    self.error("'return' outside of a function", t)
                arg = None
                if not (self.at(";") or self.at("}") or self.tok.kind == "eof" or self.tok.nl_before):
                    arg = self.expression()
                self.semicolon()
                return A.Return(arg, pos=pos)
            if kw == "throw":
                self.i += 1
                if self.tok.nl_before:
                    self.error("newline after 'throw'")
                arg = self.expression()
                self.semicolon()
                return A.Throw(arg, pos=pos)
            if kw == "try":
                self.i += 1
                return self.try_statement(pos)
            if kw == "with":
                self.i += 1
                self.expect("(")
                obj = self.expression()
                self.expect(")")
                return A.With(obj, self.statement(), pos=pos)
            if kw == "do":
                self.error("'do' loops are not supported")
        expr = self.expression()
        self.semicolon()
        return A.ExprStmt(expr, pos=pos)

    def loop_body(self):
        self.loop_depth += 1
        try:
            return self.statement()
        finally:
            self.loop_depth -= 1

    def var_decls(self, pos, allow_in: bool = True) -> A.Var:
        decls = []
        while True:
            name = self.ident()
            init = None
            if self.eat("="):
                init = self.assignment(allow_in)
            decls.append((name, init))
            if not self.eat(","):
                break
        return A.Var(decls, pos=pos)

    def for_statement(self, pos):
        self.expect("(")
        # for (var x in e) / for (x in e)
        if self.at("var") and self.peek().kind == "ident" and self.peek(2).value == "in" and self.peek(2).kind == "kw":
            self.i += 1
            name = self.ident()
            self.expect("in")
            obj = self.expression()
            self.expect(")")
            return A.ForIn(name, True, obj, self.loop_body(), pos=pos)
        if self.tok.kind == "ident" and self.peek().value == "in" and self.peek().kind == "kw":
            name = self.ident()
            self.expect("in")
            obj = self.expression()
            self.expect(")")
            return A.ForIn(name, False, obj, self.loop_body(), pos=pos)
        init = None
        if not self.at(";"):
            ipos = self.pos()
            if self.eat("var"):
                init = self.var_decls(ipos)
            else:
                init = A.ExprStmt(self.expression(), pos=ipos)
        self.expect(";")
        test = None if self.at(";") else self.expression()
        self.expect(";")
        update = None if self.at(")") else self.expression()
        self.expect(")")
        return A.For(init, test, update, self.loop_body(), pos=pos)

    def try_statement(self, pos):
        block = self.block()
        param = handler = finalizer = None
        if self.eat("catch"):
            self.expect("(")
            param = self.ident()
            self.expect(")")
            handler = self.block()
        if self.eat("finally"):
            finalizer = self.block()
        if handler is None and finalizer is None:
            self.error("'try' needs 'catch' or 'finally'")
        return A.Try(block, param, handler, finalizer, pos=pos)

    def function_rest(self, pos, require_name: bool) -> A.Func:
        name = None
        if self.tok.kind == "ident":
            name = self.ident()
        elif require_name:
            self.error("function declaration needs a name")
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                params.append(self.ident())
                if not self.eat(","):
                    break
        self.expect(")")
        return self.function_body(name, params, pos)

    def function_body(self, name, params, pos) -> A.Func:
        self.expect("{")
        saved = self.loop_depth
        self.loop_depth = 0
        self.in_function += 1
        strict = self._directive()
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}' before end of input")
            body.append(self.statement())
        self.expect("}")
        self.in_function -= 1
        self.loop_depth = saved
        return A.Func(name, params, body, strict, pos=pos)

    # -------------------------------------------------------- expressions

    def expression(self, allow_in: bool = True):
        expr = self.assignment(allow_in)
        if self.at(","):
            self.error("comma expressions are not supported")
        return expr

    def assignment(self, allow_in: bool = True):
        pos = self.pos()
        left = self.conditional(allow_in)
        t = self.tok
        if t.kind == "punct" and t.value in _ASSIGN_OPS:
            if not isinstance(left, (A.Ident, A.Member)):
                self.error("invalid assignment target", t)
            self.i += 1
            value = self.assignment(allow_in)
            return A.Assign(t.value, left, value, pos=pos)
        return left

    def conditional(self, allow_in: bool):
        pos = self.pos()
        test = self.binary(0, allow_in)
        if self.eat("?"):
            cons = self.assignment(True)
            self.expect(":")
            alt = self.assignment(allow_in)
            return A.Cond(test, cons, alt, pos=pos)
        return test

    def binary(self, level: int, allow_in: bool):
        """Precedence climbing over operators binding at least as tight as ``level``."""
        pos = self.pos()
        left = self.unary()
        while self.tok.kind in ("punct", "kw"):
            op = self.tok.value
            op_level = _BINARY_LEVEL.get(op)
            if op_level is None or op_level < level:
                break
            self.i += 1
            right = self.binary(op_level + 1, allow_in)
            if op in ("&&", "||"):
                left = A.Logical(op, left, right, pos=pos)
            else:
                left = A.Binary(op, left, right, pos=pos)
        return left

    def unary(self):
        t = self.tok
        pos = self.pos()
        if t.kind == "punct" and t.value in ("!", "-", "+", "~"):
            self.i += 1
            return A.Unary(t.value, self.unary(), pos=pos)
        if t.kind == "punct" and t.value in ("++", "--"):
            self.i += 1
            target = self.unary()
            if not isinstance(target, (A.Ident, A.Member)):
                self.error("invalid update target", t)
            return A.Update(t.value, True, target, pos=pos)
        if t.kind == "kw" and t.value in ("typeof", "delete", "void"):
            self.i += 1
            arg = self.unary()
            if t.value == "delete" and not isinstance(arg, A.Member):
                self.error("only property deletion is supported", t)
            return A.Unary(t.value, arg, pos=pos)
        expr = self.postfix()
        return expr

    def postfix(self):
        pos = self.pos()
        expr = self.call_member()
        t = self.tok
        if t.kind == "punct" and t.value in ("++", "--") and not t.nl_before:
            if not isinstance(expr, (A.Ident, A.Member)):
                self.error("invalid update target", t)
            self.i += 1
            return A.Update(t.value, False, expr, pos=pos)
        return expr

    def arguments(self) -> list:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.assignment())
                if not self.eat(","):
                    break
        self.expect(")")
        return args

    def call_member(self):
        pos = self.pos()
        if self.eat("new"):
            callee = self.member_only()
            args = self.arguments() if self.at("(") else []
            expr = A.New(callee, args, pos=pos)
        else:
            expr = self.primary()
        while True:
            if self.eat("."):
                t = self.tok
                if t.kind not in ("ident", "kw"):
                    self.error("expected property name")
                self.i += 1
                expr = A.Member(expr, t.value, False, pos=pos)
            elif self.at("["):
                expr = self.computed(expr, pos)
            elif self.at("("):
                expr = A.Call(expr, self.arguments(), pos=pos)
            else:
                return expr

    def member_only(self):
        pos = self.pos()
        expr = self.primary()
        while True:
            if self.eat("."):
                t = self.tok
                if t.kind not in ("ident", "kw"):
                    self.error("expected property name")
                self.i += 1
                expr = A.Member(expr, t.value, False, pos=pos)
            elif self.at("["):
                expr = self.computed(expr, pos)
            else:
                return expr

    def computed(self, expr, pos):
        self.expect("[")
        t = self.tok
        if t.kind == "str":
            key = t.value
        elif t.kind == "num" and isinstance(t.value, int) and t.value >= 0:
            key = str(t.value)
        else:
            self.error("only constant property keys are supported")
        self.i += 1
        self.expect("]")
        return A.Member(expr, key, True, pos=pos)

    def primary(self):
        t = self.tok
        pos = self.pos()
        if t.kind == "num":
            self.i += 1
            return A.Num(t.value, pos=pos)
        if t.kind == "str":
            self.i += 1
            return A.Str(t.value, pos=pos)
        if t.kind == "ident":
            self.i += 1
            return A.Ident(t.value, pos=pos)
        if t.kind == "kw":
            kw = t.value
            if kw in ("true", "false"):
                self.i += 1
                return A.Bool(kw == "true", pos=pos)
            if kw == "null":
                self.i += 1
                return A.Null(pos=pos)
            if kw == "undefined":
                self.i += 1
                return A.Undef(pos=pos)
            if kw == "this":
                self.i += 1
                return A.This(pos=pos)
            if kw == "function":
                self.i += 1
                return self.function_rest(pos, require_name=False)
        if t.kind == "punct":
            if t.value == "(":
                self.i += 1
                e = self.expression()
                self.expect(")")
                return e
            if t.value == "{":
                return self.object_literal()
        found = "end of input" if t.kind == "eof" else repr(t.value)
        self.error(f"unexpected {found}")

    def object_literal(self):
        pos = self.pos()
        self.expect("{")
        props = []
        while not self.at("}"):
            ppos = self.pos()
            t = self.tok
            if t.kind == "ident" and t.value in ("get", "set") and self.peek().kind in ("ident", "str", "kw", "num") and self.peek(2).value == "(":
                self.i += 1
                key = self._prop_key()
                params = []
                self.expect("(")
                if t.value == "set":
                    params.append(self.ident())
                self.expect(")")
                func = self.function_body(None, params, ppos)
                props.append(A.Prop(t.value, key, func, pos=ppos))
            else:
                key = self._prop_key()
                self.expect(":")
                props.append(A.Prop("init", key, self.assignment(), pos=ppos))
            if not self.eat(","):
                break
        self.expect("}")
        return A.Obj(props, pos=pos)

    def _prop_key(self) -> str:
        t = self.tok
        if t.kind in ("ident", "kw", "str"):
            self.i += 1
            return t.value
        if t.kind == "num" and isinstance(t.value, int) and t.value >= 0:
            self.i += 1
            return str(t.value)
        self.error("expected property name")


def parse(src: str) -> A.Program:
    return Parser(src).parse_program()


# ---------------------------------------------------------------- printing

_PREC = {op: i for i, ops in enumerate(_BINARY_PRECEDENCE) for op in ops}
_IDENT_KEY = re.compile(r"^[A-Za-z_$][\w$]*$")


def _num(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "1e999"
        return repr(v)
    return str(v)


def _key(k: str) -> str:
    return k if _IDENT_KEY.match(k) and k not in KEYWORDS else json.dumps(k)


class Printer:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def expr(self, e, prec: int = -3) -> str:
        # prec: -3 assignment context, -2 conditional, -1 below binary, >=0 binary level
        if isinstance(e, A.Num):
            s = _num(e.value)
            return s
        if isinstance(e, A.Str):
            return json.dumps(e.value)
        if isinstance(e, A.Bool):
            return "true" if e.value else "false"
        if isinstance(e, A.Null):
            return "null"
        if isinstance(e, A.Undef):
            return "undefined"
        if isinstance(e, A.This):
            return "this"
        if isinstance(e, A.Ident):
            return e.name
        if isinstance(e, A.Obj):
            parts = []
            for p in e.props:
                if p.kind == "init":
                    parts.append(f"{_key(p.key)}: {self.expr(p.value)}")
                else:
                    parts.append(f"{p.kind} {_key(p.key)}({', '.join(p.value.params)}) {self.func_body(p.value)}")
            return "({" + ", ".join(parts) + "})" if prec == -4 else "{" + ", ".join(parts) + "}"
        if isinstance(e, A.Func):
            s = f"function {e.name + ' ' if e.name else ''}({', '.join(e.params)}) {self.func_body(e)}"
            return f"({s})" if prec == -4 else s
        if isinstance(e, A.Member):
            obj = self.expr(e.obj, 100)
            if e.computed:
                return f"{obj}[{json.dumps(e.prop)}]"
            return f"{obj}.{e.prop}"
        if isinstance(e, A.Call):
            return f"{self.expr(e.callee, 100)}({', '.join(self.expr(a) for a in e.args)})"
        if isinstance(e, A.New):
            return f"new {self.expr(e.callee, 101)}({', '.join(self.expr(a) for a in e.args)})"
        if isinstance(e, A.Unary):
            sep = " " if e.op in ("typeof", "delete", "void") or e.op in ("-", "+") else ""
            s = f"{e.op}{sep}{self.expr(e.arg, 50)}"
            return self._wrap(s, 50, prec)
        if isinstance(e, A.Update):
            t = self.expr(e.target, 100)
            s = f"{e.op}{t}" if e.prefix else f"{t}{e.op}"
            return self._wrap(s, 50, prec)
        if isinstance(e, (A.Binary, A.Logical)):
            lv = _PREC[e.op]
            s = f"{self.expr(e.left, lv)} {e.op} {self.expr(e.right, lv + 1)}"
            return self._wrap(s, lv, prec)
        if isinstance(e, A.Cond):
            s = f"{self.expr(e.test, 0)} ? {self.expr(e.cons)} : {self.expr(e.alt)}"
            return self._wrap(s, -2, prec)
        if isinstance(e, A.Assign):
            s = f"{self.expr(e.target, 100)} {e.op} {self.expr(e.value)}"
            return self._wrap(s, -3, prec)
        raise TypeError(f"cannot print {type(e).__name__}")

    @staticmethod
    def _wrap(s: str, own: int, ctx: int) -> str:
        return f"({s})" if own < ctx else s

    def func_body(self, f: A.Func) -> str:
        inner = Printer()
        if f.strict:
            inner.lines.append('"use strict";')
        for st in f.body:
            inner.stmt(st, 0)
        body = "\n".join("  " + line for line in inner.lines)
        return "{\n" + body + "\n}" if inner.lines else "{}"

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def stmt(self, s, d: int) -> None:
        if isinstance(s, A.Var):
            self.emit(d, self.var_text(s) + ";")
        elif isinstance(s, A.FuncDecl):
            f = s.func
            self.emit(d, f"function {f.name}({', '.join(f.params)}) {self.func_body(f)}".replace("\n", "\n" + "  " * d))
        elif isinstance(s, A.ExprStmt):
            self.emit(d, self.expr(s.expr, -4).replace("\n", "\n" + "  " * d) + ";")
        elif isinstance(s, A.If):
            self.emit(d, f"if ({self.expr(s.test)})")
            self.sub(s.cons, d)
            if s.alt is not None:
                self.emit(d, "else")
                self.sub(s.alt, d)
        elif isinstance(s, A.While):
            self.emit(d, f"while ({self.expr(s.test)})")
            self.sub(s.body, d)
        elif isinstance(s, A.For):
            if s.init is None:
                init = ""
            elif isinstance(s.init, A.Var):
                init = self.var_text(s.init)
            else:
                init = self.expr(s.init.expr)
            test = self.expr(s.test) if s.test is not None else ""
            update = self.expr(s.update) if s.update is not None else ""
            self.emit(d, f"for ({init}; {test}; {update})")
            self.sub(s.body, d)
        elif isinstance(s, A.ForIn):
            self.emit(d, f"for ({'var ' if s.declared else ''}{s.name} in {self.expr(s.obj)})")
            self.sub(s.body, d)
        elif isinstance(s, A.Block):
            self.emit(d, "{")
            for st in s.body:
                self.stmt(st, d + 1)
            self.emit(d, "}")
        elif isinstance(s, A.Return):
            self.emit(d, "return" + (f" {self.expr(s.arg)}" if s.arg is not None else "") + ";")
        elif isinstance(s, A.Break):
            self.emit(d, "break;")
        elif isinstance(s, A.Continue):
            self.emit(d, "continue;")
        elif isinstance(s, A.Throw):
            self.emit(d, f"throw {self.expr(s.arg)};")
        elif isinstance(s, A.Try):
            self.emit(d, "try")
            self.stmt(s.block, d)
            if s.handler is not None:
                self.emit(d, f"catch ({s.param})")
                self.stmt(s.handler, d)
            if s.finalizer is not None:
                self.emit(d, "finally")
                self.stmt(s.finalizer, d)
        elif isinstance(s, A.With):
            self.emit(d, f"with ({self.expr(s.obj)})")
            self.sub(s.body, d)
        elif isinstance(s, A.Empty):
            self.emit(d, ";")
        else:
            raise TypeError(f"cannot print {type(s).__name__}")

    def sub(self, s, d: int) -> None:
        if isinstance(s, A.Block):
            self.stmt(s, d)
        else:
            self.stmt(s, d + 1)

    def var_text(self, v: A.Var) -> str:
        parts = [n if init is None else f"{n} = {self.expr(init)}" for n, init in v.decls]
        return "var " + ", ".join(parts)


def to_source(program: A.Program) -> str:
    p = Printer()
    if program.strict:
        p.lines.append('"use strict";')
    for s in program.body:
        p.stmt(s, 0)
    return "\n".join(p.lines) + "\n"
