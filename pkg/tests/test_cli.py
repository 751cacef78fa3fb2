from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest
from support import CORPUS, MANIFEST

from ifcvm.cli import main


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def _src(tmp_path, text, name="p.mjs-ifc"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_prints_result_stats_and_heap(tmp_path):
    path = _src(tmp_path, "var x = h + 1; out = x; x;")
    code, out, _ = _run("run", path, "--input", "h=1:{h}", "--stats")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "result: 2 label={h}"
    assert lines[1].startswith("steps: ") and lines[2].startswith("joins: ")
    heap = json.loads("\n".join(lines[4:]))
    assert heap["1"]["props"]["out"]["value"] == {"$": "hidden"}


def test_run_ifc_halt_exit_code():
    code, out, _ = _run("run", str(CORPUS / "implicit_heap.mjs-ifc"), "--input", "h=1:{h}", "--no-heap")
    assert code == 3
    assert out.startswith("halt: ifc-heap-star-write:")


def test_run_uncaught_exception_exit_code(tmp_path):
    code, out, _ = _run("run", _src(tmp_path, "throw 5;"), "--no-heap")
    assert code == 4 and "exception: 5" in out


def test_run_assembly_and_monitor_off():
    code, out, _ = _run("run", str(CORPUS / "fg_handwritten.ifcasm"), "--input", "h=1:{h}", "--ifc", "off",
                        "--stats", "--no-heap")
    assert code == 0
    assert "result: 1 label=low" in out and "joins: 0" in out


def test_prim_loop_has_no_joins_without_monitor(tmp_path):
    path = _src(tmp_path, "var s = 0; for (var i = 0; i < 50; i++) { s = s + i * 2; } s;")
    code, out, _ = _run("run", path, "--ifc", "off", "--stats", "--no-heap")
    assert code == 0 and "joins: 0" in out.splitlines()
    _, sparse, _ = _run("run", path, "--sparse", "--stats", "--no-heap")
    _, eager, _ = _run("run", path, "--stats", "--no-heap")
    joins = lambda text: int(next(ln for ln in text.splitlines() if ln.startswith("joins:")).split()[1])  # noqa: E731
    assert joins(sparse) < joins(eager)


def test_million_iteration_loop_has_no_joins_without_monitor(tmp_path):
    path = _src(tmp_path, "var s = 0; for (var i = 0; i < 1000000; i++) { s = s + i * 2; } s;")
    code, out, _ = _run("run", path, "--ifc", "off", "--stats", "--no-heap")
    lines = out.splitlines()
    assert code == 0 and "result: 999999000000 label=low" in lines
    assert "joins: 0" in lines and int(lines[1].split()[1]) > 10**6


def test_trace_output():
    code, out, _ = _run("run", str(CORPUS / "label_free.mjs-ifc"), "--trace", "--no-heap")
    assert code == 0 and out.startswith("main:0 enter pc=low depth=0")


@pytest.mark.parametrize("argv", [
    ["run", "missing.mjs-ifc"],
    ["run", str(CORPUS / "label_free.mjs-ifc"), "--ifc", "off", "--sparse"],
    ["run", str(CORPUS / "label_free.mjs-ifc"), "--input", "broken"],
    ["run", str(CORPUS / "label_free.mjs-ifc"), "--observer", "{x"],
    ["bogus-command"],
    [],
])
def test_usage_errors_exit_2(argv):
    assert _run(*argv)[0] == 2


def test_parse_error_is_positioned(tmp_path):
    code, _, err = _run("compile", _src(tmp_path, "if (x) {\n"))
    assert code == 2 and "2:1:" in err


def test_vm_step_limit_exit_2(tmp_path):
    code, _, err = _run("run", _src(tmp_path, "for (var i = 0; i < 1000000; i++) { }"), "--max-steps", "50")
    assert code == 2 and "step" in err


def test_loop_without_exit_is_reported(tmp_path):
    code, _, err = _run("run", _src(tmp_path, "while (true) { }"))
    assert code == 2 and "cannot reach the exit" in err


def test_compile_and_asm_round_trip(tmp_path):
    out_path = tmp_path / "p.ifcasm"
    code, _, _ = _run("compile", str(CORPUS / "golden" / "implicit_flow.mjs-ifc"), "-o", str(out_path))
    assert code == 0
    assert out_path.read_text() == (CORPUS / "golden" / "implicit_flow.ifcasm").read_text()
    code, out, _ = _run("asm", str(out_path))
    assert code == 0 and out == out_path.read_text()


def test_bad_assembly_exit_2(tmp_path):
    code, _, err = _run("asm", _src(tmp_path, "func main(regs=1) {\n  nope\n}", "b.ifcasm"))
    assert code == 2 and "2:3:" in err


def test_analyze_outputs(tmp_path):
    path = str(CORPUS / "break_loop.mjs-ifc")
    code, out, _ = _run("analyze", path, "--dump-cfg")
    assert code == 0 and "ipd main variant=plain" in out
    code, out, _ = _run("analyze", path, "--dot", "--variant", "handler")
    assert code == 0 and out.startswith("digraph")
    assert _run("analyze", path, "--function", "nope")[0] == 2


def test_ni_check_outputs(tmp_path):
    code, out, _ = _run("ni-check", str(MANIFEST))
    assert code == 0 and out.splitlines()[-1].endswith("PASS (halt clause: 12, heap clause: 7)")
    code, out, _ = _run("ni-check", str(MANIFEST), "--ifc", "off")
    assert code == 5 and "FAIL" in out
    assert _run("ni-check", str(MANIFEST), "--lockstep")[0] == 0
    assert _run("ni-check", str(MANIFEST), "--sparse")[0] == 0
    summary = tmp_path / "summary.json"
    assert _run("ni-check", str(MANIFEST), "--json", str(summary))[0] == 0
    data = json.loads(summary.read_text())
    assert data["total"] == data["passed"] == len(data["cases"]) == 19
    assert {c["clause"] for c in data["cases"]} == {"halt", "heap"}


def test_ni_check_small_manifests(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text('{"cases": []}')
    code, out, _ = _run("ni-check", str(empty))
    assert code == 0 and out.strip() == "0 cases"
    one = tmp_path / "one.json"
    one.write_text(json.dumps({"cases": [{"name": "c", "code": "var l = 0; if (h) { l = 1; } out = l;",
                                          "domains": ["h"], "runs": [["h=0:{h}"], ["h=1:{h}"]]}]}))
    code, out, _ = _run("ni-check", str(one))
    assert code == 0 and out.splitlines()[-1] == "1/1 PASS (halt clause)"
    bad = tmp_path / "bad.json"
    bad.write_text('{"cases": [{"name": "x"}]}')
    assert _run("ni-check", str(bad))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ifcvm", "ni-check", str(MANIFEST)], capture_output=True, text=True)
    assert proc.returncode == 0 and "19/19 PASS" in proc.stdout


def test_ni_check_compares_against_expected_verdict(tmp_path):
    manifest = tmp_path / "m.json"
    manifest.write_text(json.dumps({"cases": [{"name": "c", "code": "out = h;", "domains": ["h"],
                                               "runs": [["h=0:{h}"], ["h=1:{h}"]], "expect": "fail"}]}))
    code, out, _ = _run("ni-check", str(manifest), "--ifc", "off")
    assert code == 0 and "c: FAIL heaps differ" in out
    code, out, _ = _run("ni-check", str(manifest))
    assert code == 5 and "c: PASS" in out
