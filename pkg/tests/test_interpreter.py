from __future__ import annotations

import math

import pytest
from support import CORPUS, run_source

from ifcvm import Machine, parse_assembly
from ifcvm.bytecode import AsmError, Program
from ifcvm.interpreter import StepLimitExceeded, VMError
from ifcvm.labels import BOTTOM, DomainRegistry

# expected completion values were produced by running each program under node
FUNCTIONAL = [
    ('var s = 0; for (var i = 0; i < 5; i++) { s += i; } s;', 10),
    ('var s = 0, i = 0; while (i < 10) { i++; if (i % 2) continue; if (i > 7) break; s += i; } s;', 12),
    ('function f(a, b) { return a * b + arguments.length; } f(3, 4);', 14),
    ('function mk() { var c = 0; return function () { c++; return c; }; } var g = mk(); g(); g(); g();', 3),
    ("var r = ''; try { throw 'x'; } catch (e) { r = e + '!'; } finally { r += 'f'; } r;", 'x!f'),
    ('function f() { try { return 1; } finally { x = 2; } } f() + x;', 3),
    ('var n = 0; for (var i = 0; i < 3; i++) { try { if (i == 1) continue; n += 10; } finally { n += 1; } } n;', 23),
    ("o = {a: 1, b: 2, c: 3}; var ks = ''; for (var k in o) { ks += k; } ks;", 'abc'),
    ('o = {a: 1}; with (o) { a = 5; b = 6; } o.a + b;', 11),
    ("var x = 1; eval('x = x + 41'); x;", 42),
    ("function f() { var y = 2; return eval('y * 21'); } f();", 42),
    ('function C(v) { this.v = v; } C.prototype.get = function () { return this.v + 1; }; var c = new C(4); c.get();', 5),
    ("function C() {} var c = new C(); (c instanceof C) + ':' + typeof c;", 'true:object'),
    ('var o = {get x() { return 7; }, set x(v) { this.y = v * 2; }}; o.x = 5; o.x + o.y;', 17),
    ("typeof undefined + typeof null + typeof 1 + typeof 's' + typeof function () {};", 'undefinedobjectnumberstringfunction'),
    ('var o = {a: 1}; delete o.a; typeof o.a;', 'undefined'),
    ("1 + '2' - 1;", 11),
    ("(1 < 2) + (2 < 1) + ('a' < 'b');", 2),
    ("null == undefined && 0 == '' && !(null == 0);", True),
    ('var a = 5; a += 2; a -= 1; a *= 3; a %= 7; a <<= 2; a;', 16),
    ('-7 >> 1;', -4),
    ('-7 >>> 28;', 15),
    ("0 || '' || 'z';", 'z'),
    ('1 && 2 && 0;', 0),
    ("var o = {}; o.x || 'default';", 'default'),
    ('function f(n) { if (n <= 1) return 1; return n * f(n - 1); } f(6);', 720),
    ("function f(n) { if (n == 0) throw 'done'; return f(n - 1); } var r; try { f(5); } catch (e) { r = e; } r;", 'done'),
    ("var s = ''; var o = {a: 1}; var p = {b: 2}; for (var k in o) { s += k; } for (k in p) { s += k; } s;", 'ab'),
    ('var x = 10; function f() { var x = 1; function g() { return x; } return g(); } f() + x;', 11),
    ("'use strict'; function f() { return this; } typeof f();", 'undefined'),
    ('function f() { return this; } typeof f();', 'object'),
    ('var i = 0; var j = i++ + ++i; i * 10 + j;', 22),
    ('var o = {n: 0}; o.n++; ++o.n; o.n--; o.n;', 1),
    ("var a = 3 > 2 ? 'yes' : 'no'; a;", 'yes'),
    ('1 / 0;', math.inf),
    ('0 / 0 == 0 / 0;', False),
    ("var o = {1: 'one', 'two-words': 2}; o[1] + o['two-words'];", 'one2'),
    ("!!{} + !!'' + !!'0';", 2),]


@pytest.mark.parametrize("src, expected", FUNCTIONAL, ids=[f"prog{i}" for i in range(len(FUNCTIONAL))])
def test_functional_semantics_with_and_without_monitor(src, expected):
    for kwargs in ({"ifc": False}, {"ifc": True}, {"ifc": True, "sparse": True}):
        _, r, _ = run_source(src, **kwargs)
        assert r.status == "end", (kwargs, r.reason, r.detail)
        assert r.value.value == expected or (isinstance(expected, float) and math.isnan(expected))
        assert type(r.value.value) is type(expected) or isinstance(expected, float)


def test_sloppy_this_is_global_and_strict_this_is_undefined():
    _, r, _ = run_source("function f() { this.q = 3; } f(); q;")
    assert r.value.value == 3
    _, r, _ = run_source("'use strict'; function f() { return this; } typeof f();")
    assert r.value.value == "undefined"


# ---------------------------------------------------------------- monitor rules

def test_explicit_flow_carries_label():
    _, r, reg = run_source("var x = h + 1; x;", 1)
    assert r.value.value == 2 and r.value.label == reg.label("h")


def test_low_branch_keeps_low_label():
    _, r, _ = run_source("var l = 0; if (l) { l = 1; } l;", 1)
    assert r.value.label == BOTTOM


@pytest.mark.parametrize("src, reason", [
    ("o = {}; if (h) { o.x = 1; } 0;", "ifc-heap-star-write"),
    ("o = {x: 0}; if (h) { o.x = 2; } 0;", "ifc-heap-star-write"),
    ("g = 0; if (h) { g = 1; } 0;", "ifc-heap-star-write"),
    ("o = {x: 1}; if (h) { delete o.x; } 0;", "ifc-star-use"),
    ("var l = 0; if (h) { l = 1; } if (l) { } 0;", "ifc-star-use"),
    ("var l = 0; if (h) { l = 1; } function f() {} var g = l ? f : f; 0;", "ifc-star-use"),
    ("var u; u.x;", "uncaught-exception"),
])
def test_halts(src, reason):
    _, r, _ = run_source(src, 1)
    assert (r.status, r.reason) == ("halt", reason)


def test_secret_false_branch_does_not_halt_when_nothing_is_written():
    _, r, _ = run_source("o = {}; if (h) { o.x = 1; } 0;", 0)
    assert r.status == "end"


def test_typeof_and_prototype_reads():
    _, r, reg = run_source("typeof h;", 1)
    assert r.value.value == "number" and r.value.label == reg.label("h")
    _, r, _ = run_source("function C(){}; C.prototype.v = 1; var o = new C(); o.v;", 1)
    assert r.value.value == 1 and r.value.label == BOTTOM


def test_getter_result_is_not_starred_when_called_at_low_pc():
    _, r, _ = run_source("var o = {get x() { return 4; }}; o.x;", 1)
    assert r.value.value == 4 and r.value.label == BOTTOM


def test_exception_from_secret_branch_is_caught_at_high_pc():
    src = (CORPUS / "exception_register.mjs-ifc").read_text() + "\nr;"
    _, r, reg = run_source(src, 1)
    assert r.value.value == 1 and r.value.label == reg.label("h", star=True)
    _, r, _ = run_source(src, 0)
    assert r.value.value == 0 and r.value.label == BOTTOM


def test_monitor_off_has_no_labels_and_no_joins():
    _, r, _ = run_source("var x = h; if (h) { x = 3; } x;", 1, ifc=False)
    assert r.value.label == BOTTOM and r.stats.joins == 0 and r.stats.pushes == 0


def test_trace_lines_show_pc_and_depth():
    lines = []
    run_source("var l = 0; if (h) { l = 1; } l;", 1, trace=lines.append)
    assert lines[0].startswith("main:0 enter pc=low depth=0")
    assert any("jfalse pc={h} depth=1" in ln for ln in lines)


def test_debug_mode_checks_invariants_on_corpus():
    for path in sorted(CORPUS.glob("*.mjs-ifc")):
        for h in (0, 1):
            m, r, _ = run_source(path.read_text(), h, debug=True)
            assert m.invariant_violations() == []


# ---------------------------------------------------------------- machine setup

def test_step_limit():
    m = Machine(parse_assembly("func main(regs=2) {\n@top:\n  loop-if-less r0, r1, @top\n  end r0\n}"),
                {}, registry=DomainRegistry())
    m.frames[0].vals[0] = 0
    m.frames[0].vals[1] = 10**9
    with pytest.raises(StepLimitExceeded):
        m.run(100)


def test_rejects_bad_setups():
    program = parse_assembly("func main(regs=1) {\n  end r0\n}")
    with pytest.raises(VMError):
        Machine(program, {}, ifc=False, sparse=True)
    with pytest.raises(VMError):
        Machine(program, {"h": (1, "high")})
    with pytest.raises(AsmError, match="duplicate"):
        Program((program.entry, program.entry))


def test_block_domain_raises_initial_pc():
    program = parse_assembly("func main(regs=2) {\n  .domain h\n  mov r1, n:1\n  end r1\n}")
    reg = DomainRegistry(["h"])
    r = Machine(program, {}, registry=reg).run()
    assert r.value.label == reg.label("h")


# r1 = h; r3 is pre-labeled {h} so writes to it under the secret branch stay unstarred
_STRUCT_PROLOGUE = """
func main(regs=6) {
  enter
  resolve-global r1, id:h
  mov r3, r1
  mov r4, r1
  new-object r5
  mov r2, n:1
  put-by-id r5, prop:x, r2, b:true
  jfalse r1, @done
"""
_STRUCT_EPILOGUE = """
@done:
  resolve-base r2, id:o, b:false
  put-by-id r2, prop:o, r3, b:false
  resolve-base r2, id:p, b:false
  put-by-id r2, prop:p, r5, b:false
  end r4
}"""


def _run_struct(body: str, h: int = 1):
    from ifcvm.heap import GLOBAL, Ref

    reg = DomainRegistry(["h"])
    m = Machine(parse_assembly(_STRUCT_PROLOGUE + body + _STRUCT_EPILOGUE), {"h": (h, reg.label("h"))},
                registry=reg, debug=True)
    r = m.run()
    glob = r.heap.get(GLOBAL)
    objects = {k: r.heap.get(glob.props[k].value) for k in ("o", "p")
               if k in glob.props and isinstance(glob.props[k].value, Ref)}
    return r, objects, reg


def test_insertion_under_secret_pc_raises_structure_label():
    r, objs, reg = _run_struct("  new-object r3\n  put-by-id r3, prop:x, r1, b:true\n")
    assert r.status == "end"
    o = objs["o"]
    assert reg.label("h").leq(o.struct_label)
    assert o.props["x"].label == reg.label("h")


def test_insertion_into_low_structure_under_secret_pc_halts():
    r, _, _ = _run_struct("  put-by-id r5, prop:y, r1, b:true\n")
    assert (r.status, r.reason) == ("halt", "ifc-heap-star-write")


def test_insertion_at_low_pc_keeps_structure_label_low():
    r, objs, _ = _run_struct("", h=0)
    assert r.status == "end" and objs["p"].struct_label == BOTTOM


def test_delete_under_secret_pc():
    # deleting from an object whose structure and property are both secret is allowed
    r, objs, reg = _run_struct("  new-object r3\n  put-by-id r3, prop:x, r1, b:true\n  del-by-id r4, r3, prop:x\n")
    assert r.status == "end"
    assert "x" not in objs["o"].props and reg.label("h").leq(objs["o"].struct_label)
    assert r.value.value is True and r.value.label == reg.label("h")
    # a low property of a low-structure object cannot be deleted under a secret branch
    r, _, _ = _run_struct("  del-by-id r4, r5, prop:x\n")
    assert (r.status, r.reason) == ("halt", "ifc-scope-violation")
    # deleting a missing property changes nothing and is allowed
    r, objs, _ = _run_struct("  del-by-id r4, r5, prop:zz\n")
    assert r.status == "end" and objs["p"].struct_label == BOTTOM
