"""Acceptance criteria; each test prints one PASS/FAIL line."""

from __future__ import annotations

import random
import time

from support import CORPUS, corpus_cases, random_block, random_graph, run_source

from ifcvm import DomainRegistry, Machine, build_cfg
from ifcvm.cfg import brute_force_post_dominators, ipd_from_sets, post_dominators, successors
from ifcvm.heap import dump_heap, render_value
from ifcvm.interpreter import HALT_REASONS
from ifcvm.labels import BOTTOM
from ifcvm.minijs import compile_program, to_source
from ifcvm.minijs.gen import random_program
from ifcvm.ni import check_ni, lockstep_check


def test_1_ipd_oracle_equivalence(criterion):
    with criterion("1 IPD oracle equivalence") as rec:
        rng = random.Random(20240601)
        start = time.perf_counter()
        graphs = with_sen = 0
        for _ in range(60):
            succ, sink = random_graph(rng, rng.randint(1, 199))
            assert post_dominators(succ, sink) == ipd_from_sets(brute_force_post_dominators(succ, sink), sink)
            graphs += 1
        for _ in range(60):
            block = random_block(rng, rng.randint(2, 198))
            for handler in (False, True):
                succ, sen, sink = successors(block, handler)
                assert len(succ) <= 200
                cfg = build_cfg(block, handler)
                assert list(cfg.ipd) == ipd_from_sets(brute_force_post_dominators(succ, sink), sink)
                graphs += 1
                if sen is not None and any(sen in out for out in succ[:sen]):
                    with_sen += 1
        elapsed = time.perf_counter() - start
        assert graphs >= 100 and with_sen > 0
        assert elapsed < 10.0, f"took {elapsed:.1f}s"
        rec.detail = f"{graphs} graphs, {with_sen} with exception edges into the SEN, {elapsed:.2f}s"


BREAK_SRC = "var l = 1; while (1) { if (h) { break; } l = 0; break; } l;"
FG_SRC = """
function f() { var l = 0; try { g(); } catch (e) { l = 1; } return l; }
function g() { if (h) { throw 9; } return 7; }
f();
"""


def test_2_reference_examples(criterion):
    with criterion("2 reference example behaviors") as rec:
        # (a) implicit flow into a register leaves a starred value
        _, r, reg = run_source("var l = 0; if (h) { l = 1; } l;", 1)
        assert r.status == "end" and r.value.value == 1
        assert r.value.label == reg.label("h", star=True)

        # (b) branching on it halts
        _, r, _ = run_source("var l = 0; if (h) { l = 1; } if (l) { } l;", 1)
        assert (r.status, r.reason) == ("halt", "ifc-star-use")

        # (c) storing it in the heap halts
        _, r, _ = run_source("obj = {}; var l = 0; if (h) { l = 1; } obj.a = l;", 1)
        assert (r.status, r.reason) == ("halt", "ifc-heap-star-write")

        # (d) the exception from g decides whether the handler runs
        _, r, _ = run_source(FG_SRC, 0)
        assert r.status == "end" and r.value.value == 0 and r.value.label == BOTTOM
        lines: list[str] = []
        _, r, reg = run_source(FG_SRC, 1, trace=lines.append)
        catch_lines = [ln for ln in lines if " catch " in ln]
        assert catch_lines and all("pc={h} " in ln for ln in catch_lines)
        assert r.status == "end" and r.value.value == 1
        assert r.value.label == reg.label("h", star=True)

        # (e) the branch ends at the loop exit, so the later write is starred
        main = compile_program(BREAK_SRC).entry
        cfg = build_cfg(main, False)
        jfalse = [i for i, ins in enumerate(main.instructions) if ins.opcode == "jfalse"]
        assert len(jfalse) == 1
        branch = jfalse[0]
        break_jump = main.instructions[branch + 1]
        assert break_jump.opcode == "jmp"
        loop_exit = break_jump.targets()[0]
        assert cfg.ipd[branch] == loop_exit
        _, r, reg = run_source(BREAK_SRC, 0)
        assert r.status == "end" and r.value.value == 0
        assert r.value.label == reg.label("h", star=True)
        _, r, _ = run_source(BREAK_SRC, 1)
        assert r.value.value == 1 and r.value.label == BOTTOM
        rec.detail = "examples a-e"


def test_3_ni_differential_suite(criterion):
    with criterion("3 non-interference differential suite") as rec:
        start = time.perf_counter()
        cases = corpus_cases()
        on = [check_ni(c) for c in cases]
        off = [check_ni(c, ifc=False) for c in cases]
        elapsed = time.perf_counter() - start
        failed = [v.line for v in on if not v.passed]
        leaky_failing = [c.name for c, v in zip(cases, off) if c.leaky and not v.passed]
        assert len(cases) >= 12
        assert not failed, failed
        assert len(leaky_failing) >= 3, leaky_failing
        assert all(v.passed for c, v in zip(cases, off) if not c.leaky)
        assert elapsed < 30.0
        rec.detail = (f"{len(cases)}/{len(cases)} PASS monitored, {len(leaky_failing)} leaky cases FAIL "
                      f"unmonitored, {elapsed:.2f}s")


def test_4_lockstep_equivalence(criterion):
    with criterion("4 lockstep equivalence") as rec:
        checked = 0
        for case in corpus_cases():
            ends = []
            for k in (0, 1):
                m = Machine(case.compiled(), case.inputs(k), registry=case.registry)
                ends.append(m.run(200_000).status == "end")
            if not all(ends):
                continue
            v = lockstep_check(case)
            assert v.passed and v.lockstep, v.line
            checked += 1
        assert checked > 0
        rec.detail = f"{checked} cases where both runs terminate"


def _outcome(m: Machine, registry: DomainRegistry):
    r = m.run(200_000)
    value = render_value(r.value.value) if r.value else None
    exc = render_value(r.exception.value) if r.exception else None
    return (r.status, r.reason, value, exc), dump_heap(r.heap, registry)


def test_5_monitor_transparency(criterion):
    with criterion("5 monitor transparency") as rec:
        runs = 0
        for case in corpus_cases():
            for k in (0, 1):
                inputs = {name: (value, BOTTOM) for name, (value, _) in case.inputs(k).items()}
                program = case.compiled()
                off = _outcome(Machine(program, inputs, ifc=False, registry=case.registry), case.registry)
                on = _outcome(Machine(program, inputs, ifc=True, registry=case.registry), case.registry)
                assert off == on, f"{case.name} run {k}"
                runs += 1
        rec.detail = f"{runs} runs identical"


def test_6_sparse_labeling(criterion):
    with criterion("6 sparse labeling equivalence") as rec:
        runs = 0
        for case in corpus_cases():
            for k in (0, 1):
                program = case.compiled()
                eager = _outcome(Machine(program, case.inputs(k), registry=case.registry), case.registry)
                sparse = _outcome(Machine(program, case.inputs(k), sparse=True, registry=case.registry), case.registry)
                assert eager == sparse, f"{case.name} run {k}"
                runs += 1
        src = (CORPUS / "bench" / "registers.mjs-ifc").read_text()
        m_eager, r_eager, _ = run_source(src, 1)
        m_sparse, r_sparse, _ = run_source(src, 1, sparse=True)
        assert r_eager.value == r_sparse.value
        assert r_sparse.stats.joins < r_eager.stats.joins
        rec.detail = f"{runs} runs identical, joins {r_eager.stats.joins} eager vs {r_sparse.stats.joins} sparse"


def test_7_random_program_invariants(criterion):
    with criterion("7 structural invariants on random programs") as rec:
        outcomes: dict[str, int] = {}
        for seed in range(1000):
            program = compile_program(to_source(random_program(seed)))
            for h in (0, 1):
                registry = DomainRegistry(["h"])
                inputs = {"h": (h, registry.label("h")), "l": (2, BOTTOM)}
                # debug mode raises on a decreasing pc-stack, a non-empty pc-stack at a normal end,
                # or a starred value in the heap
                m = Machine(program, inputs, registry=registry, debug=True)
                r = m.run(200_000)
                assert r.status in ("end", "halt")
                if r.status == "halt":
                    assert r.reason in HALT_REASONS, r.reason
                else:
                    assert not m.rho
                assert not r.heap.star_violations()
                key = r.reason or "end"
                outcomes[key] = outcomes.get(key, 0) + 1
        rec.detail = "1000 programs, 2 runs each: " + ", ".join(f"{k} {n}" for k, n in sorted(outcomes.items()))
