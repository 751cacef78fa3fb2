"""Intra-procedural control-flow graphs and immediate post-dominators.

Node ids ``0..n-1`` are instructions. The handler variant adds a synthetic
exit node (SEN) at id ``n`` that collects exceptions escaping the function
and returns. Every variant has a virtual sink as its last node, so that
post-dominance is defined for blocks with several exits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bytecode import BRANCHES, JUMPS, THROWING, CodeBlock, validate


class CfgError(ValueError):
    pass


@dataclass(frozen=True)
class Cfg:
    name: str
    handler_variant: bool
    size: int  # instruction count
    succ: tuple[tuple[int, ...], ...]  # indexed by node id, sink included
    sen: int | None
    sink: int
    ipd: tuple[int | None, ...]  # None only for the sink

    @property
    def node_count(self) -> int:
        return len(self.succ)

    def left(self, node: int) -> int:
        return self.succ[node][0]

    def right(self, node: int) -> int:
        return self.succ[node][1]

    def is_exit(self, node: int) -> bool:
        return node == self.sink or node == self.sen

    def node_name(self, node: int) -> str:
        if node == self.sink:
            return "sink"
        if node == self.sen:
            return "SEN"
        return str(node)

    def adjacency_text(self) -> str:
        lines = [f"cfg {self.name} variant={'handler' if self.handler_variant else 'plain'}"]
        for node, out in enumerate(self.succ):
            targets = " ".join(self.node_name(t) for t in out)
            lines.append(f"{self.node_name(node)} -> {targets}".rstrip())
        return "\n".join(lines)

    def ipd_text(self) -> str:
        lines = [f"ipd {self.name} variant={'handler' if self.handler_variant else 'plain'}"]
        for node, d in enumerate(self.ipd):
            if d is not None:
                lines.append(f"{self.node_name(node)} : {self.node_name(d)}")
        return "\n".join(lines)

    def to_dot(self, block: CodeBlock | None = None) -> str:
        lines = [f'digraph "{self.name}" {{']
        for node in range(self.node_count):
            label = self.node_name(node)
            if block is not None and node < self.size:
                label += " " + block.instructions[node].opcode
            lines.append(f'  n{node} [label="{label}"];')
        for node, out in enumerate(self.succ):
            for t in out:
                lines.append(f"  n{node} -> n{t};")
        lines.append("}")
        return "\n".join(lines)


def successors(cb: CodeBlock, handler_on_stack: bool) -> tuple[list[list[int]], int | None, int]:
    """Edge lists for ``cb``; returns (succ, sen, sink)."""
    n = len(cb.instructions)
    sen = n if handler_on_stack else None
    sink = n + 1 if handler_on_stack else n
    exit_node = sen if handler_on_stack else sink
    succ: list[list[int]] = []
    for i, ins in enumerate(cb.instructions):
        op = ins.opcode
        out: list[int] = []
        if op in BRANCHES:
            out = [i + 1, ins.targets()[0]]
        elif op in JUMPS:
            out = [ins.targets()[0]]
        elif op == "ret":
            out = [exit_node]
        elif op == "end":
            out = [sink]
        elif op != "throw":
            out = [i + 1]
        if op in THROWING:
            entry = cb.handler_for(i)
            if entry is not None:
                out.append(entry.handler)
            elif handler_on_stack:
                out.append(sen)
            elif op == "throw":
                out.append(sink)
        for t in out:
            if not 0 <= t <= sink:
                raise CfgError(f"{cb.name}[{i}] {op}: edge to {t} leaves the block")
        deduped = list(dict.fromkeys(out))
        succ.append(deduped)
    if handler_on_stack:
        succ.append([sink])
    succ.append([])
    return succ, sen, sink


def build_cfg(cb: CodeBlock, handler_on_stack: bool) -> Cfg:
    problems = validate(cb)
    if problems:
        raise CfgError("; ".join(problems))
    succ, sen, sink = successors(cb, handler_on_stack)
    try:
        idom = post_dominators(succ, sink)
    except CfgError as e:
        raise CfgError(f"{cb.name}: {e}") from None
    return Cfg(
        name=cb.name,
        handler_variant=handler_on_stack,
        size=len(cb.instructions),
        succ=tuple(tuple(s) for s in succ),
        sen=sen,
        sink=sink,
        ipd=tuple(idom),
    )


def _check_reaches_sink(succ: list[list[int]], sink: int) -> None:
    preds: list[list[int]] = [[] for _ in succ]
    for v, out in enumerate(succ):
        for w in out:
            preds[w].append(v)
    seen = {sink}
    stack = [sink]
    while stack:
        v = stack.pop()
        for p in preds[v]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    missing = [v for v in range(len(succ)) if v not in seen]
    if missing:
        raise CfgError(f"nodes cannot reach the exit: {missing[:10]}")


def post_dominators(succ: list[list[int]] | tuple, sink: int) -> list[int | None]:
    """Immediate post-dominators via Lengauer-Tarjan on the reversed graph.

    Returns a list mapping node -> ipd (``None`` for the sink).
    """
    _check_reaches_sink(succ, sink)
    size = len(succ)
    # reversed graph: successors are original predecessors
    rsucc: list[list[int]] = [[] for _ in range(size)]
    for v, out in enumerate(succ):
        for w in out:
            rsucc[w].append(v)
    rpred = succ  # predecessors in the reversed graph

    semi = [-1] * size  # dfs number of semidominator, -1 = unvisited
    vertex: list[int] = []
    parent = [-1] * size
    ancestor = [-1] * size
    label = list(range(size))
    idom = [-1] * size
    bucket: list[list[int]] = [[] for _ in range(size)]

    # iterative dfs numbering from the sink
    stack = [(sink, -1)]
    while stack:
        v, p = stack.pop()
        if semi[v] != -1:
            continue
        parent[v] = p
        semi[v] = len(vertex)
        vertex.append(v)
        for w in reversed(rsucc[v]):
            if semi[w] == -1:
                stack.append((w, v))

    def compress(v: int) -> None:
        path = []
        while ancestor[ancestor[v]] != -1:
            path.append(v)
            v = ancestor[v]
        for u in reversed(path):
            a = ancestor[u]
            if semi[label[a]] < semi[label[u]]:
                label[u] = label[a]
            ancestor[u] = ancestor[a]

    def evaluate(v: int) -> int:
        if ancestor[v] == -1:
            return v
        compress(v)
        return label[v]

    for i in range(len(vertex) - 1, 0, -1):
        w = vertex[i]
        for v in rpred[w]:
            if semi[v] == -1:
                continue
            u = evaluate(v)
            if semi[u] < semi[w]:
                semi[w] = semi[u]
        bucket[vertex[semi[w]]].append(w)
        ancestor[w] = parent[w]
        pw = parent[w]
        for v in bucket[pw]:
            u = evaluate(v)
            idom[v] = u if semi[u] < semi[v] else pw
        bucket[pw].clear()
    for i in range(1, len(vertex)):
        w = vertex[i]
        if idom[w] != vertex[semi[w]]:
            idom[w] = idom[idom[w]]
    result: list[int | None] = [d if d != -1 else None for d in idom]
    result[sink] = None
    return result


def brute_force_post_dominators(succ: list[list[int]] | tuple, sink: int) -> list[set[int]]:
    """Post-dominator sets by iterating pdom(n) = {n} | meet of pdom over successors."""
    _check_reaches_sink(succ, sink)
    size = len(succ)
    everything = set(range(size))
    pdom = [set(everything) for _ in range(size)]
    pdom[sink] = {sink}
    changed = True
    while changed:
        changed = False
        for v in range(size):
            if v == sink:
                continue
            new = set(everything)
            for w in succ[v]:
                new &= pdom[w]
            new.add(v)
            if new != pdom[v]:
                pdom[v] = new
                changed = True
    return pdom


def ipd_from_sets(pdom: list[set[int]], sink: int) -> list[int | None]:
    """The closest strict post-dominator: the one whose own set is largest."""
    out: list[int | None] = []
    for v, doms in enumerate(pdom):
        if v == sink:
            out.append(None)
            continue
        strict = doms - {v}
        # strict post-dominators form a chain; the nearest has the biggest pdom set
        out.append(max(strict, key=lambda d: len(pdom[d])))
    return out
