"""Two-run non-interference checking.

Low-equivalence of values, heaps, and machine states is defined up to a
partial bijection between the locations of the two runs. Variable
environments are treated as locations too, keyed ``("env", uid)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .bytecode import CodeBlock, Program, parse_assembly
from .heap import EVAL_FUNCTION, GLOBAL, OBJECT_PROTOTYPE, Heap, LabeledValue, ScopeNode, VarEnv
from .interpreter import Machine, StepLimitExceeded
from .labels import BOTTOM, DomainRegistry, Label
from .values import NULL, UNDEFINED, EnvRef, Ref, canonical

ROOTS = (GLOBAL.loc, OBJECT_PROTOTYPE.loc, EVAL_FUNCTION.loc)


def _key(x):
    if isinstance(x, Ref):
        return x.loc
    if isinstance(x, VarEnv):
        return ("env", x.uid)
    if isinstance(x, EnvRef):
        return ("env", x.env.uid)
    return None


@dataclass
class Bijection:
    """A partial bijection between locations of run 1 and run 2."""

    fwd: dict = field(default_factory=dict)
    bwd: dict = field(default_factory=dict)

    def related(self, a, b) -> bool:
        return self.fwd.get(a) == b and a in self.fwd

    def can_add(self, a, b) -> bool:
        return self.fwd.get(a, b) == b and self.bwd.get(b, a) == a

    def add(self, a, b) -> bool:
        """Record (a, b); False if that would break functionality or injectivity."""
        if not self.can_add(a, b):
            return False
        self.fwd[a] = b
        self.bwd[b] = a
        return True

    def inverse(self) -> Bijection:
        return Bijection(dict(self.bwd), dict(self.fwd))

    def pairs(self) -> set:
        return set(self.fwd.items())

    def copy(self) -> Bijection:
        return Bijection(dict(self.fwd), dict(self.bwd))

    def __len__(self) -> int:
        return len(self.fwd)


# ---------------------------------------------------------------- values

def _visible(label: Label, observer: Label) -> bool:
    return label.leq(observer)


def low_equiv_value(v1: LabeledValue, v2: LabeledValue, beta: Bijection, observer: Label = BOTTOM) -> bool:
    """Star on either side, both invisible, or both visible and equal modulo ``beta``."""
    if v1.label.star or v2.label.star:
        return True
    vis1, vis2 = _visible(v1.label, observer), _visible(v2.label, observer)
    if not vis1 and not vis2:
        return True
    if vis1 != vis2:
        return False
    return values_equal(v1.value, v2.value, beta)


def values_equal(a, b, beta: Bijection) -> bool:
    ka, kb = _key(a), _key(b)
    if ka is not None or kb is not None:
        return ka is not None and kb is not None and beta.related(ka, kb)
    return canonical(a) == canonical(b)


# ---------------------------------------------------------------- code identity

def fingerprint(blocks: dict[str, CodeBlock], name: str, memo: dict | None = None) -> tuple:
    """Structural identity of a block and the functions it creates, ignoring names."""
    memo = {} if memo is None else memo
    if name in memo:
        return memo[name]
    cb = blocks[name]
    rows = []
    for ins in cb.instructions:
        ops = []
        for o in ins.operands:
            if o.kind == "fn":
                ops.append(("fn", fingerprint(blocks, o.value, memo)))
            else:
                ops.append((o.kind, canonical(o.value) if o.kind == "num" else o.value))
        rows.append((ins.opcode, tuple(ops)))
    fp = (tuple(rows), cb.register_count, cb.arg_count, cb.strict, cb.exception_table, cb.variables, cb.domain)
    memo[name] = fp
    return fp


# ---------------------------------------------------------------- heaps

@dataclass
class _Side:
    heap: Heap
    blocks: dict[str, CodeBlock]
    envs: dict = field(default_factory=dict)  # ("env", uid) -> VarEnv
    memo: dict = field(default_factory=dict)

    def fp(self, name: str) -> tuple:
        return fingerprint(self.blocks, name, self.memo)

    def note(self, x) -> None:
        if isinstance(x, EnvRef):
            self.envs[("env", x.env.uid)] = x.env
        elif isinstance(x, VarEnv):
            self.envs[("env", x.uid)] = x

    def exists(self, k) -> bool:
        if isinstance(k, int):
            return k in self.heap.objects
        return k in self.envs


class _Comparer:
    """Greedy β construction: pair locations met at corresponding visible positions."""

    def __init__(self, s1: _Side, s2: _Side, observer: Label, beta: Bijection | None = None) -> None:
        self.s1, self.s2 = s1, s2
        self.observer = observer
        self.beta = beta or Bijection()
        self.queue: list = []
        self.checked: set = set()
        self.problem = ""

    def fail(self, msg: str) -> bool:
        if not self.problem:
            self.problem = msg
        return False

    def pair(self, a, b, where: str) -> bool:
        """Require refs/envs ``a``, ``b`` to be related, extending β if both are fresh."""
        ka, kb = _key(a), _key(b)
        if ka is None or kb is None:
            return self.fail(f"{where}: reference vs primitive")
        self.s1.note(a)
        self.s2.note(b)
        if self.beta.related(ka, kb):
            return True
        if not self.beta.add(ka, kb):
            return self.fail(f"{where}: location {ka} vs {kb} conflicts with the bijection")
        self.queue.append((ka, kb, where))
        return True

    def value(self, v1: LabeledValue, v2: LabeledValue, where: str) -> bool:
        if v1.label.star or v2.label.star:
            return True
        vis1, vis2 = _visible(v1.label, self.observer), _visible(v2.label, self.observer)
        if not vis1 and not vis2:
            return True
        if vis1 != vis2:
            return self.fail(f"{where}: visible on one side only")
        a, b = v1.value, v2.value
        if _key(a) is not None or _key(b) is not None:
            return self.pair(a, b, where)
        if canonical(a) != canonical(b):
            return self.fail(f"{where}: {a!r} vs {b!r}")
        return True

    def drain(self) -> bool:
        while self.queue:
            ka, kb, where = self.queue.pop(0)
            if (ka, kb) in self.checked:
                continue
            self.checked.add((ka, kb))
            if not self.location(ka, kb, where):
                return False
        return True

    def location(self, ka, kb, where: str) -> bool:
        if isinstance(ka, int) != isinstance(kb, int):
            return self.fail(f"{where}: object vs environment")
        if isinstance(ka, int):
            return self.obj(ka, kb, where)
        return self.env(self.s1.envs[ka], self.s2.envs[kb], where)

    def obj(self, a: int, b: int, where: str) -> bool:
        o1, o2 = self.s1.heap.objects[a], self.s2.heap.objects[b]
        at = f"@{a}~@{b}"
        obs = self.observer
        if o1.struct_label.star or o2.struct_label.star:
            return True
        vis1, vis2 = _visible(o1.struct_label, obs), _visible(o2.struct_label, obs)
        if not vis1 and not vis2:
            return True
        if vis1 != vis2:
            return self.fail(f"{at}: structure visible on one side only")
        if list(o1.props) != list(o2.props):
            return self.fail(f"{at}: properties {list(o1.props)} vs {list(o2.props)}")
        for name, p1 in o1.props.items():
            p2 = o2.props[name]
            if p1.accessor != p2.accessor:
                return self.fail(f"{at}.{name}: accessor vs data property")
            if p1.accessor:
                for part in ("getter", "setter"):
                    g1, g2 = getattr(p1, part), getattr(p2, part)
                    lv1 = LabeledValue(g1 if g1 is not None else UNDEFINED, p1.label)
                    lv2 = LabeledValue(g2 if g2 is not None else UNDEFINED, p2.label)
                    if not self.value(lv1, lv2, f"{at}.{name}.{part}"):
                        return False
            elif not self.value(LabeledValue(p1.value, p1.label), LabeledValue(p2.value, p2.label), f"{at}.{name}"):
                return False
        pv1 = LabeledValue(o1.proto if o1.proto is not None else NULL, o1.proto_label)
        pv2 = LabeledValue(o2.proto if o2.proto is not None else NULL, o2.proto_label)
        if not self.value(pv1, pv2, f"{at}.[[proto]]"):
            return False
        if o1.builtin != o2.builtin:
            return self.fail(f"{at}: host kind differs")
        f1, f2 = o1.function, o2.function
        if (f1 is None) != (f2 is None):
            return self.fail(f"{at}: function vs plain object")
        if f1 is not None:
            if self.s1.fp(f1.block.name) != self.s2.fp(f2.block.name):
                return self.fail(f"{at}: function code differs")
            if not self.scope(f1.scope, f2.scope, f"{at}.[[scope]]"):
                return False
        return True

    def env(self, e1: VarEnv, e2: VarEnv, where: str) -> bool:
        at = f"env{e1.uid}~env{e2.uid}"
        obs = self.observer
        if e1.struct_label.star or e2.struct_label.star:
            return True
        vis1, vis2 = _visible(e1.struct_label, obs), _visible(e2.struct_label, obs)
        if not vis1 and not vis2:
            return True
        if vis1 != vis2:
            return self.fail(f"{at}: structure visible on one side only")
        if e1.names != e2.names:
            return self.fail(f"{at}: variables {e1.names} vs {e2.names}")
        for i, name in enumerate(e1.names):
            if not self.value(LabeledValue(e1.vals[i], e1.labs[i]), LabeledValue(e2.vals[i], e2.labs[i]), f"{at}.{name}"):
                return False
        return True

    def scope(self, c1: ScopeNode | None, c2: ScopeNode | None, where: str) -> bool:
        """Star links match anything; high links match high links or the end of the chain."""
        obs = self.observer
        k = 0
        while c1 is not None or c2 is not None:
            l1 = c1.label if c1 is not None else None
            l2 = c2.label if c2 is not None else None
            if (l1 is not None and l1.star) or (l2 is not None and l2.star):
                return True
            hi1 = l1 is not None and not _visible(l1, obs)
            hi2 = l2 is not None and not _visible(l2, obs)
            if hi1 or hi2:
                if (hi1 or c1 is None) and (hi2 or c2 is None):
                    return True
                return self.fail(f"{where}[{k}]: high link vs low link")
            if c1 is None or c2 is None:
                return self.fail(f"{where}: chains of different length")
            if not self.pair(c1.obj, c2.obj, f"{where}[{k}]"):
                return False
            c1, c2 = c1.next, c2.next
            k += 1
        return True


def low_equiv_heap(
    h1: Heap, roots1, h2: Heap, roots2, observer: Label = BOTTOM, *,
    blocks1: dict | None = None, blocks2: dict | None = None, beta: Bijection | None = None,
) -> tuple[bool, Bijection, str]:
    """Greedy low-equivalence of two heaps from paired roots; returns (ok, β, diagnostic)."""
    s1 = _Side(h1, blocks1 or {})
    s2 = _Side(h2, blocks2 or {})
    c = _Comparer(s1, s2, observer, beta.copy() if beta else None)
    for a, b in zip(roots1, roots2):
        if not c.pair(Ref(a), Ref(b), "root"):
            return False, c.beta, c.problem
    ok = c.drain()
    return ok, c.beta, c.problem


# ---------------------------------------------------------------- exhaustive oracle

def _reachable(side: _Side, roots) -> list:
    """Locations reachable from ``roots`` through any value, in breadth-first order."""
    order = []
    seen = set()
    todo = [r for r in roots]
    while todo:
        k = todo.pop(0)
        if k in seen or not side.exists(k):
            continue
        seen.add(k)
        order.append(k)
        for x in _children(side, k):
            side.note(x)
            kx = _key(x)
            if kx is not None and kx not in seen:
                todo.append(kx)
    return order


def _children(side: _Side, k) -> list:
    if not isinstance(k, int):
        return list(side.envs[k].vals)
    o = side.heap.objects[k]
    out = []
    for p in o.props.values():
        out.extend(x for x in (p.value, p.getter, p.setter) if x is not None)
    if o.proto is not None:
        out.append(o.proto)
    if o.function is not None:
        node = o.function.scope
        while node is not None:
            out.append(node.obj if isinstance(node.obj, Ref) else EnvRef(node.obj))
            node = node.next
    return out


def _positions(side: _Side, k) -> dict:
    """Labeled values of one location keyed by where they sit."""
    if not isinstance(k, int):
        env = side.envs[k]
        return {n: LabeledValue(env.vals[i], env.labs[i]) for i, n in enumerate(env.names)}
    o = side.heap.objects[k]
    out = {}
    for name, p in o.props.items():
        if p.accessor:
            out[(name, "get")] = LabeledValue(p.getter or UNDEFINED, p.label)
            out[(name, "set")] = LabeledValue(p.setter or UNDEFINED, p.label)
        else:
            out[name] = LabeledValue(p.value, p.label)
    out["[[proto]]"] = LabeledValue(o.proto if o.proto is not None else NULL, o.proto_label)
    return out


def beta_is_witness(s1: _Side, s2: _Side, beta: Bijection, observer: Label, roots) -> bool:
    """Check the definition directly: roots related and every related pair equivalent."""
    for a, b in roots:
        if not beta.related(a, b):
            return False
    c = _Comparer(s1, s2, observer, beta.copy())
    for ka, kb in beta.pairs():
        if not c.location(ka, kb, "oracle"):
            return False
        if len(c.beta) != len(beta):
            return False  # needed a pair outside the candidate
    return True


def exhaustive_low_equiv_heap(
    h1: Heap, roots1, h2: Heap, roots2, observer: Label = BOTTOM, *,
    blocks1: dict | None = None, blocks2: dict | None = None, limit: int = 50,
) -> bool:
    """Search every partial bijection over reachable locations for a witness.

    Test oracle for :func:`low_equiv_heap`; exponential, so capped at ``limit``
    locations per side.
    """
    s1 = _Side(h1, blocks1 or {})
    s2 = _Side(h2, blocks2 or {})
    locs1 = _reachable(s1, list(roots1))
    locs2 = _reachable(s2, list(roots2))
    if len(locs1) > limit or len(locs2) > limit:
        raise ValueError("heap too large for exhaustive search")
    roots = list(zip(roots1, roots2))

    def signature(side: _Side, k):
        if not isinstance(k, int):
            return ("env",)
        o = side.heap.objects[k]
        return ("obj", o.builtin, o.function is not None)

    def forced(a):
        """The partner ``a`` must have because a related pair shows it at a visible position."""
        for p1, p2 in list(beta.fwd.items()):
            pos1, pos2 = _positions(s1, p1), _positions(s2, p2)
            for where, lv in pos1.items():
                if _key(lv.value) != a or lv.label.star or not _visible(lv.label, observer):
                    continue
                other = pos2.get(where)
                if other is not None and not other.label.star and _visible(other.label, observer):
                    return _key(other.value)
        return None

    beta = Bijection()
    for a, b in roots:
        if not beta.add(a, b):
            return False

    def search(i: int) -> bool:
        if i == len(locs1):
            return beta_is_witness(s1, s2, beta, observer, roots)
        a = locs1[i]
        if a in beta.fwd:
            return search(i + 1)
        must = forced(a)
        if must is not None:
            options = [must] if must in locs2 and must not in beta.bwd else []
        else:
            options = [None] + [b for b in locs2 if b not in beta.bwd and signature(s2, b) == signature(s1, a)]
        for b in options:
            if b is None:
                if search(i + 1):
                    return True
                continue
            beta.add(a, b)
            if search(i + 1):
                return True
            del beta.fwd[a]
            del beta.bwd[b]
        return False

    return search(0)


# ---------------------------------------------------------------- cases

@dataclass
class NiCase:
    name: str
    program: Program | None
    low: dict[str, tuple[object, Label]]
    secrets: tuple[dict[str, tuple[object, Label]], dict[str, tuple[object, Label]]]
    observer: Label = BOTTOM
    registry: DomainRegistry = field(default_factory=DomainRegistry)
    expect: str = "pass"
    leaky: bool = False
    source: str | None = None
    strict: bool = False

    def inputs(self, k: int) -> dict:
        out = dict(self.low)
        out.update(self.secrets[k])
        return out

    def compiled(self) -> Program:
        if self.program is None:
            from .minijs import compile_program

            self.program = compile_program(self.source, strict=self.strict)
        return self.program


@dataclass
class Verdict:
    name: str
    passed: bool
    clause: str  # "halt", "heap", or "" on failure
    detail: str
    statuses: tuple[str, str] = ("", "")
    lockstep: bool | None = None

    @property
    def line(self) -> str:
        if self.passed:
            extra = f" [{self.detail}]" if self.detail else ""
            return f"{self.name}: PASS ({self.clause} clause){extra}"
        return f"{self.name}: FAIL {self.detail}"


def _machine(case: NiCase, k: int, ifc: bool, sparse: bool) -> Machine:
    return Machine(case.compiled(), case.inputs(k), ifc=ifc, sparse=sparse, registry=case.registry)


def _final_compare(m1: Machine, m2: Machine, observer: Label):
    return low_equiv_heap(m1.heap, ROOTS, m2.heap, ROOTS, observer, blocks1=m1.blocks, blocks2=m2.blocks)


def check_ni(case: NiCase, *, ifc: bool = True, sparse: bool = False, lockstep: bool = False,
             max_steps: int = 200_000) -> Verdict:
    """Run both secret variants; PASS if either halted or the final heaps are low-equivalent."""
    if lockstep:
        return lockstep_check(case, ifc=ifc, sparse=sparse, max_steps=max_steps)
    m1 = _machine(case, 0, ifc, sparse)
    m2 = _machine(case, 1, ifc, sparse)
    try:
        r1 = m1.run(max_steps)
        r2 = m2.run(max_steps)
    except StepLimitExceeded as e:
        return Verdict(case.name, False, "", f"step limit: {e}")
    statuses = (r1.reason or r1.status, r2.reason or r2.status)
    if r1.status == "halt" or r2.status == "halt":
        return Verdict(case.name, True, "halt", "/".join(statuses), statuses)
    ok, _, problem = _final_compare(m1, m2, case.observer)
    if ok:
        return Verdict(case.name, True, "heap", "", statuses)
    return Verdict(case.name, False, "", f"heaps differ: {problem}", statuses)


# ---------------------------------------------------------------- lockstep

def _low_state(m: Machine, observer: Label) -> bool:
    pc = m.pc()
    return not pc.star and _visible(pc, observer)


def _advance_to_low(m: Machine, observer: Label, budget: list) -> None:
    while m.status == "running" and not _low_state(m, observer):
        if budget[0] <= 0:
            raise StepLimitExceeded("lockstep budget exhausted")
        budget[0] -= 1
        m.step()


def low_equiv_state(m1: Machine, m2: Machine, observer: Label = BOTTOM, beta: Bijection | None = None):
    """Compare two low states: node, pc-stack, call stack, and heap.

    Frames are matched by stack position, and pc entries compare their
    label, IPD, and handler flag but not their frame field. Returns
    (ok, β, diagnostic).
    """
    s1 = _Side(m1.heap, m1.blocks)
    s2 = _Side(m2.heap, m2.blocks)
    c = _Comparer(s1, s2, observer, beta.copy() if beta else None)
    if len(m1.frames) != len(m2.frames):
        return False, c.beta, f"call stacks of depth {len(m1.frames)} vs {len(m2.frames)}"
    if m1.node != m2.node:
        return False, c.beta, f"at node {m1.node} vs {m2.node}"
    pos1 = {f.fid: i for i, f in enumerate(m1.frames)}
    pos2 = {f.fid: i for i, f in enumerate(m2.frames)}
    low1 = [e for e in m1.rho if _visible(e.label, observer) and not e.label.star]
    low2 = [e for e in m2.rho if _visible(e.label, observer) and not e.label.star]
    if len(low1) != len(low2):
        return False, c.beta, "pc-stacks differ in low entries"
    for e1, e2 in zip(low1, low2):
        if (e1.label, e1.ipd, e1.handler, pos1.get(e1.frame)) != (e2.label, e2.ipd, e2.handler, pos2.get(e2.frame)):
            return False, c.beta, f"pc entry {e1} vs {e2}"
    for a, b in zip(ROOTS, ROOTS):
        c.pair(Ref(a), Ref(b), "root")
    for depth, (f1, f2) in enumerate(zip(m1.frames, m2.frames)):
        where = f"frame{depth}"
        if s1.fp(f1.block.name) != s2.fp(f2.block.name):
            return False, c.beta, f"{where}: different code"
        if len(f1.vals) != len(f2.vals):
            return False, c.beta, f"{where}: register counts differ"
        if f1.ret_node != f2.ret_node or f1.handler_on_stack != f2.handler_on_stack:
            return False, c.beta, f"{where}: return address or handler flag differs"
        for r in range(len(f1.vals)):
            if not c.value(LabeledValue(f1.vals[r], f1.labs[r]), LabeledValue(f2.vals[r], f2.labs[r]), f"{where}.r{r}"):
                return False, c.beta, c.problem
        if not c.scope(f1.scope, f2.scope, f"{where}.scope"):
            return False, c.beta, c.problem
    ok = c.drain()
    return ok, c.beta, c.problem


def lockstep_check(case: NiCase, *, ifc: bool = True, sparse: bool = False, max_steps: int = 200_000) -> Verdict:
    """Pair the i-th low state of each run and require them to be equivalent."""
    m1 = _machine(case, 0, ifc, sparse)
    m2 = _machine(case, 1, ifc, sparse)
    budget = [max_steps * 2]
    obs = case.observer
    beta = None
    paired = 0
    try:
        while True:
            _advance_to_low(m1, obs, budget)
            _advance_to_low(m2, obs, budget)
            if m1.status == "halt" or m2.status == "halt":
                statuses = (m1.reason or m1.status, m2.reason or m2.status)
                return Verdict(case.name, True, "halt", f"{paired} low steps", statuses, True)
            if m1.status != "running" or m2.status != "running":
                break
            ok, beta, problem = low_equiv_state(m1, m2, obs, beta)
            if not ok:
                return Verdict(case.name, False, "", f"lockstep step {paired}: {problem}", lockstep=False)
            paired += 1
            budget[0] -= 2
            if budget[0] <= 0:
                raise StepLimitExceeded("lockstep budget exhausted")
            m1.step()
            m2.step()
    except StepLimitExceeded as e:
        return Verdict(case.name, False, "", f"step limit: {e}")
    statuses = (m1.reason or m1.status, m2.reason or m2.status)
    if m1.status != m2.status:
        return Verdict(case.name, False, "", "one run ended while the other continued at low pc", statuses, False)
    ok, _, problem = _final_compare(m1, m2, obs)
    if not ok:
        return Verdict(case.name, False, "", f"heaps differ: {problem}", statuses, False)
    return Verdict(case.name, True, "heap", f"{paired} low steps", statuses, True)


# ---------------------------------------------------------------- manifests and reports

def parse_value(text: str):
    if text == "undefined":
        return UNDEFINED
    try:
        v = json.loads(text)
    except json.JSONDecodeError:
        return text
    if v is None:
        return NULL
    if isinstance(v, (list, dict)):
        raise ValueError(f"inputs must be primitives, got {text!r}")
    return v


def parse_input(spec: str, registry: DomainRegistry) -> tuple[str, tuple[object, Label]]:
    """``name=value:label``; the label part is optional and defaults to bottom."""
    name, sep, rest = spec.partition("=")
    if not sep or not name:
        raise ValueError(f"bad input {spec!r}; expected name=value:label")
    value_text, label = rest, BOTTOM
    if ":" in rest:
        head, _, tail = rest.rpartition(":")
        try:
            label = registry.parse(tail)
            value_text = head
        except ValueError:
            value_text = rest
    return name.strip(), (parse_value(value_text), label)


def _inputs(items, registry: DomainRegistry) -> dict:
    if isinstance(items, dict):
        items = [f"{k}={v}" for k, v in items.items()]
    return dict(parse_input(s, registry) for s in items)


def load_manifest(path: str | Path) -> list[NiCase]:
    path = Path(path)
    data = json.loads(path.read_text())
    cases = []
    for entry in data.get("cases", []):
        registry = DomainRegistry()
        for d in entry.get("domains", []):
            registry.bit(d)
        program = source = None
        if "asm" in entry:
            program = parse_assembly((path.parent / entry["asm"]).read_text())
        elif "source" in entry:
            source = (path.parent / entry["source"]).read_text()
        else:
            source = entry["code"]
        runs = entry["runs"]
        if len(runs) != 2:
            raise ValueError(f"case {entry.get('name')!r} needs exactly two runs")
        cases.append(NiCase(
            name=entry["name"],
            program=program,
            low=_inputs(entry.get("low", []), registry),
            secrets=(_inputs(runs[0], registry), _inputs(runs[1], registry)),
            observer=registry.parse(entry.get("observer", "low")),
            registry=registry,
            expect=entry.get("expect", "pass"),
            leaky=bool(entry.get("leaky", False)),
            source=source,
            strict=bool(entry.get("strict", False)),
        ))
    return cases


def summary(verdicts: list[Verdict]) -> str:
    if not verdicts:
        return "0 cases"
    passed = [v for v in verdicts if v.passed]
    clauses: dict[str, int] = {}
    for v in passed:
        clauses[v.clause] = clauses.get(v.clause, 0) + 1
    if len(clauses) == 1:
        detail = f" ({next(iter(clauses))} clause)"
    elif clauses:
        detail = " (" + ", ".join(f"{k} clause: {n}" for k, n in sorted(clauses.items())) + ")"
    else:
        detail = ""
    return f"{len(passed)}/{len(verdicts)} PASS{detail}"


def report(verdicts: list[Verdict]) -> str:
    lines = [v.line for v in verdicts]
    lines.append(summary(verdicts))
    return "\n".join(lines)


def report_json(verdicts: list[Verdict]) -> str:
    """Machine-readable form of ``report``."""
    cases = [{"name": v.name, "passed": v.passed, "clause": v.clause, "detail": v.detail,
              "statuses": list(v.statuses), "lockstep": v.lockstep} for v in verdicts]
    passed = sum(v.passed for v in verdicts)
    return json.dumps({"cases": cases, "total": len(verdicts), "passed": passed,
                       "summary": summary(verdicts)}, indent=2)
