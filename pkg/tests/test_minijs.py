from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from support import CORPUS, run_source

from ifcvm import build_cfg
from ifcvm.bytecode import serialize_assembly, validate_program
from ifcvm.minijs import CompileError, MiniJSError, compile_eval, compile_program, parse, to_source
from ifcvm.minijs import ast as A
from ifcvm.minijs.gen import random_program, random_source

SOURCES = sorted(CORPUS.glob("**/*.mjs-ifc"))


@pytest.mark.parametrize("path", SOURCES, ids=lambda p: p.stem)
def test_corpus_parses_round_trips_and_compiles(path):
    tree = parse(path.read_text())
    assert parse(to_source(tree)) == tree
    program = compile_program(path.read_text())
    assert validate_program(program) == []
    for block in program.blocks:
        build_cfg(block, False)
        build_cfg(block, True)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_generated_programs_round_trip(seed):
    tree = random_program(seed)
    assert parse(to_source(tree)) == tree


def test_generator_is_deterministic():
    assert random_source(7) == random_source(7)
    assert random_source(7) != random_source(8)


def test_parser_shapes():
    tree = parse("var a = 1, b; a = b = 2; x.y[\"z\"] += 1;")
    assert isinstance(tree.body[0], A.Var) and tree.body[0].decls[1] == ("b", None)
    assign = tree.body[1].expr
    assert isinstance(assign.value, A.Assign)
    member = tree.body[2].expr.target
    assert isinstance(member, A.Member) and member.prop == "z"


def test_precedence_and_associativity():
    e = parse("1 + 2 * 3 - 4;").body[0].expr
    assert e.op == "-" and e.left.op == "+" and e.left.right.op == "*"
    e = parse("a || b && c;").body[0].expr
    assert isinstance(e, A.Logical) and e.op == "||" and e.right.op == "&&"
    e = parse("a = b ? c : d;").body[0].expr
    assert isinstance(e.value, A.Cond)


def test_automatic_semicolons_and_directives():
    tree = parse("'use strict'\nvar a = 1\na++\nreturn_ = a")
    assert tree.strict and len(tree.body) == 3
    assert parse("function f() { 'use strict'; return 1 }").body[0].func.strict


@pytest.mark.parametrize("src, line, col", [
    ("var = 1;", 1, 5),
    ("if (x) {\n  y = ;\n}", 2, 7),
    ("function f() {\n", 2, 1),
    ("x = 'abc", 1, 5),
    ("a = 1 +* 2;", 1, 8),
    ("1 = 2;", 1, 3),
    ("x = #;", 1, 5),
])
def test_syntax_errors_have_positions(src, line, col):
    with pytest.raises(MiniJSError) as info:
        parse(src)
    assert (info.value.line, info.value.col) == (line, col)


@pytest.mark.parametrize("src", [
    "a, b;",
    "do { } while (x);",
    "o[k] = 1;",
    "'x' in o;",
    "break;",
    "function f() { continue; }",
])
def test_unsupported_or_invalid_constructs_are_rejected(src):
    with pytest.raises(MiniJSError):
        compile_program(src)


def test_strict_mode_restrictions():
    with pytest.raises(CompileError):
        compile_program("'use strict'; with (o) { }")
    _, r, _ = run_source("'use strict'; undeclared = 1;")
    assert r.reason == "uncaught-exception"


def test_locals_live_in_registers_unless_captured_or_dynamic():
    program = compile_program("""
function plain(a) { var b = a + 1; return b; }
function captured() { var c = 1; return function () { return c; }; }
function dynamic() { var d = 1; eval(''); return d; }
""")
    text = {b.name: serialize_assembly(type(program)((b,))) for b in program.blocks}
    assert "create-activation" not in text["plain"]
    assert "create-activation" in text["captured"] and "get-scoped-var" in text["anon"]
    assert "create-activation" in text["dynamic"] and "resolve" in text["dynamic"]


def test_block_names_are_unique():
    program = compile_program("function f() {} var g = function () {}; var h = function () {}; function k() { function f() {} }")
    names = [b.name for b in program.blocks]
    assert names[0] == "main" and len(names) == len(set(names))
    assert "f" in names and "f.2" in names and "anon" in names


def test_compile_eval_blocks():
    blocks, strict = compile_eval("'use strict'; function q() {} 1 + 2;", prefix="eval3")
    assert strict
    assert blocks[0].name == "eval3" and blocks[0].instructions[-1].opcode == "ret"
    assert any(b.name == "eval3.q" for b in blocks)


def test_bounded_loop_compiles_to_bottom_test():
    main = compile_program("for (var i = 0; i < 3; i++) { }").entry
    ops = [ins.opcode for ins in main.instructions]
    assert "loop-if-less" in ops and "jfalse" not in ops
    main = compile_program("var i = 0; while (i != 3) { i++; }").entry
    assert "jfalse" in [ins.opcode for ins in main.instructions]
