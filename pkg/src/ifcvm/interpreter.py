"""The instrumented stack machine.

State is the usual quadruple: current node, heap, call stack, and pc-stack,
plus the return-value and exception-value interpreter variables. Every
register, heap property, scope link, and pc entry carries a Label.
Writes use deferred no-sensitive-upgrade: a register written under a pc
that is not below its old label gets a star instead of halting, and the
machine halts only when a starred value is branched on, called, or stored
in the heap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .bytecode import CodeBlock, Program, validate_program
from .cfg import Cfg, build_cfg
from .heap import (
    EVAL_FUNCTION,
    GLOBAL,
    OBJECT_PROTOTYPE,
    FunctionPart,
    Heap,
    LabeledValue,
    ObjectRecord,
    Property,
    ScopeNode,
    VarEnv,
    bootstrap_heap,
)
from .labels import BOTTOM, DomainRegistry, Label, format_label
from .values import (
    EMPTY,
    NULL,
    UNDEFINED,
    EnvRef,
    PropIter,
    Ref,
    apply_prim,
    to_number,
    truthy,
    type_name,
)

HALT_REASONS = (
    "ifc-star-use",
    "ifc-scope-violation",
    "ifc-heap-star-write",
    "uncaught-exception",
    "runtime-type-error",
)


class VMError(RuntimeError):
    """Problems with the machine setup rather than the running program."""


class StepLimitExceeded(VMError):
    pass


class _Halt(Exception):
    def __init__(self, reason: str, detail: str) -> None:
        super().__init__(detail)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True, slots=True)
class PcEntry:
    label: Label
    ipd: int
    frame: int
    handler: bool = False


@dataclass(eq=False)
class Frame:
    fid: int
    block: CodeBlock
    cfg: Cfg
    code: list
    vals: list
    labs: list
    scope: ScopeNode | None
    ret_node: int | None = None
    handler_on_stack: bool = False
    args: tuple = ()
    callee: Ref | None = None
    constructing: bool = False
    getter: bool = False
    dreg: int | None = None
    discard: bool = False
    scope_label: Label = BOTTOM
    scope_depth: int = 0
    activation: VarEnv | None = None
    sparse: bool = False
    floor: Label = BOTTOM
    pending: LabeledValue | None = None

    @property
    def register_count(self) -> int:
        return len(self.vals)


@dataclass
class Stats:
    steps: int = 0
    joins: int = 0
    pushes: int = 0


@dataclass
class Result:
    status: str  # "end" or "halt"
    reason: str | None
    detail: str
    value: LabeledValue | None
    exception: LabeledValue | None
    heap: Heap
    stats: Stats = field(default_factory=Stats)


def _decode(block: CodeBlock) -> list[tuple]:
    rows = []
    for ins in block.instructions:
        ops = ins.operands
        if ins.opcode == "mov":
            src = ops[1]
            if src.kind == "reg":
                rows.append(("mov", ops[0].value, src.value, None))
            else:
                rows.append(("mov", ops[0].value, None, src.const_value()))
        else:
            rows.append((ins.opcode, *[o.value if o.kind not in ("undefined", "null") else o.const_value() for o in ops]))
    return rows


class Machine:
    """One execution of a program. Call :meth:`run` or drive :meth:`step`."""

    def __init__(
        self,
        program: Program,
        inputs: dict[str, tuple[object, Label]] | None = None,
        *,
        ifc: bool = True,
        sparse: bool = False,
        registry: DomainRegistry | None = None,
        debug: bool = False,
        trace=None,
        check: bool = True,
    ) -> None:
        if sparse and not ifc:
            raise VMError("sparse labeling requires the monitor to be on")
        if check:
            diags = validate_program(program)
            if diags:
                raise VMError("invalid program: " + "; ".join(diags))
        self.program = program
        self.ifc = ifc
        self.sparse = sparse
        self.registry = registry or DomainRegistry()
        self.debug = debug
        self.trace = trace
        self.stats = Stats()
        self.blocks: dict[str, CodeBlock] = {}
        self.cfgs: dict[tuple[str, bool], Cfg] = {}
        self.codes: dict[str, list] = {}
        for b in program.blocks:
            self._register_block(b)
        self._fids = itertools.count(1)
        self._eval_count = 0
        self._eval_cache: dict[tuple[str, bool], tuple] = {}

        self.heap: Heap = bootstrap_heap()
        g = self.heap.get(GLOBAL)
        for name, (value, label) in (inputs or {}).items():
            if isinstance(value, Ref) or not isinstance(label, Label):
                raise VMError(f"input {name!r} must be a primitive with a label")
            g.props[name] = Property(value, label)

        entry = program.entry
        domain = self._domain_label(entry)
        self.rho: list[PcEntry] = []
        main_scope = ScopeNode(GLOBAL, BOTTOM)
        self.frames: list[Frame] = []
        frame = self._new_frame(entry, False, main_scope, domain)
        self.frames.append(frame)
        if self.ifc and not domain.is_bottom:
            self.rho.append(PcEntry(domain, frame.cfg.sink, frame.fid))
        self.node = 0
        self.gamma: LabeledValue = LabeledValue(UNDEFINED, BOTTOM)
        self.exc: LabeledValue | None = None
        self.status = "running"
        self.reason: str | None = None
        self.detail = ""
        self.value: LabeledValue | None = None
        self.exception: LabeledValue | None = None

    # ------------------------------------------------------------ setup

    def _register_block(self, b: CodeBlock) -> None:
        if b.name in self.blocks:
            raise VMError(f"duplicate block {b.name!r}")
        self.blocks[b.name] = b
        # both variants up front; this also rejects malformed blocks before they run
        for handler in (False, True):
            self.cfgs[(b.name, handler)] = build_cfg(b, handler)
        self.codes[b.name] = _decode(b)

    def _domain_label(self, block: CodeBlock) -> Label:
        if block.domain and self.ifc:
            return self.registry.label(block.domain)
        return BOTTOM

    def _new_frame(self, block: CodeBlock, handler: bool, scope, pc: Label) -> Frame:
        n = block.register_count
        return Frame(
            fid=next(self._fids),
            block=block,
            cfg=self.cfgs[(block.name, handler)],
            code=self.codes[block.name],
            vals=[UNDEFINED] * n,
            labs=[pc] * n,
            scope=scope,
            handler_on_stack=handler,
            scope_label=pc,
            sparse=self.sparse,
            floor=pc,
        )

    # ------------------------------------------------------------ labels

    def j(self, a: Label, b: Label) -> Label:
        if not self.ifc:
            return BOTTOM
        self.stats.joins += 1
        return a.join(b)

    def pc(self) -> Label:
        return self.rho[-1].label if self.rho else BOTTOM

    @property
    def frame(self) -> Frame:
        return self.frames[-1]

    def put(self, f: Frame, dst: int, value, *labels: Label) -> None:
        """Register write with deferred no-sensitive-upgrade.

        ``labels`` are the source labels; the pc is always joined in.
        """
        if not self.ifc:
            f.vals[dst] = value
            f.labs[dst] = BOTTOM
            return
        pc = self.pc()
        if f.sparse:
            floor = f.floor
            if pc == floor and all(l.leq(floor) for l in labels):
                f.vals[dst] = value
                f.labs[dst] = floor
                return
            f.sparse = False
        lab = pc
        for l in labels:
            lab = self.j(lab, l)
        if not pc.leq(f.labs[dst]):
            lab = lab.with_star()
        f.vals[dst] = value
        f.labs[dst] = lab

    def push_pc(self, label: Label, handler: bool = False) -> None:
        """Enter a region influenced by ``label`` that ends at IPD(current node)."""
        if not self.ifc:
            return
        self.stats.pushes += 1
        f = self.frame
        ipd = f.cfg.ipd[self.node]
        rho = self.rho
        exit_ipd = ipd == f.cfg.sink or ipd == f.cfg.sen
        if f.sparse and label.leq(f.floor) and (rho[-1].label if rho else BOTTOM) == f.floor:
            # the label cannot raise the pc, so only the entry bookkeeping is needed
            if exit_ipd:
                if not rho:
                    rho.append(PcEntry(label, f.cfg.sink, f.fid, handler))
            elif rho and rho[-1].ipd == ipd and rho[-1].frame == f.fid:
                top = rho[-1]
                if handler and not top.handler:
                    rho[-1] = PcEntry(top.label, ipd, f.fid, True)
            else:
                rho.append(PcEntry(f.floor, ipd, f.fid, handler))
            return
        if exit_ipd:
            if rho:
                top = rho[-1]
                rho[-1] = PcEntry(self.j(top.label, label), top.ipd, top.frame, top.handler)
            else:
                rho.append(PcEntry(label, f.cfg.sink, f.fid, handler))
        elif rho and rho[-1].ipd == ipd and rho[-1].frame == f.fid:
            top = rho[-1]
            rho[-1] = PcEntry(self.j(top.label, label), ipd, f.fid, top.handler or handler)
        else:
            base = rho[-1].label if rho else BOTTOM
            rho.append(PcEntry(self.j(label, base), ipd, f.fid, handler))

    def is_ipd(self) -> None:
        if not self.frames:
            return
        fid = self.frame.fid
        rho = self.rho
        while rho and rho[-1].ipd == self.node and rho[-1].frame == fid:
            rho.pop()

    def _halt(self, reason: str, detail: str):
        raise _Halt(reason, detail)

    def _star(self, label: Label, what: str) -> None:
        if label.star:
            self._halt("ifc-star-use", f"{what} carries a star label")

    # ------------------------------------------------------------ exceptions

    def _raise(self, message: str, deciding: Label) -> None:
        """Raise an implicit exception whose occurrence depends on ``deciding``."""
        pc = self.pc()
        if self.ifc and not deciding.leq(pc):
            self._halt("runtime-type-error", message + " (under a context below the deciding label)")
        self.exc = LabeledValue(message, self.j(deciding, pc))
        self._throw()

    def _throw(self) -> None:
        """Transfer control for the pending exception in the current frame."""
        f = self.frame
        entry = f.block.handler_for(self.node)
        if entry is not None:
            depth = entry.depth
            while f.scope_depth > depth:
                f.scope = f.scope.next
                f.scope_depth -= 1
            self.node = entry.handler
        elif f.handler_on_stack:
            self.node = f.cfg.sen
        else:
            self.exception = self.exc
            self._halt("uncaught-exception", "exception escaped the program")

    # ------------------------------------------------------------ running

    def run(self, max_steps: int | None = None) -> Result:
        while self.status == "running":
            if max_steps is not None and self.stats.steps >= max_steps:
                raise StepLimitExceeded(f"no result after {max_steps} steps")
            self.step()
        return self.result()

    def result(self) -> Result:
        return Result(self.status, self.reason, self.detail, self.value, self.exception, self.heap, self.stats)

    def step(self) -> None:
        if self.status != "running":
            raise VMError("machine is not running")
        f = self.frame
        node = self.node
        self.stats.steps += 1
        try:
            if node == f.cfg.sen:
                self._sen()
                op = "SEN"
            else:
                row = f.code[node]
                op = row[0]
                getattr(self, _HANDLERS[op])(f, row)
        except _Halt as h:
            self.status = "halt"
            self.reason = h.reason
            self.detail = h.detail
            if self.trace is not None:
                self.trace(self._trace_line(f, node, "halt"))
            return
        if self.status == "running":
            self.is_ipd()
        if self.trace is not None:
            self.trace(self._trace_line(f, node, op))
        if self.debug:
            problems = self.invariant_violations()
            if problems:
                raise VMError("invariant violated: " + "; ".join(problems))

    def _trace_line(self, f: Frame, node: int, op: str) -> str:
        return f"{f.block.name}:{f.cfg.node_name(node)} {op} pc={format_label(self.pc(), self.registry)} depth={len(self.rho)}"

    def invariant_violations(self) -> list[str]:
        out = []
        for a, b in zip(self.rho, self.rho[1:]):
            if not a.label.leq(b.label):
                out.append("pc-stack labels decrease")
                break
        if self.status == "end" and self.rho:
            out.append("pc-stack not empty at normal end")
        out.extend("star stored at " + s for s in self.heap.star_violations())
        return out

    # ------------------------------------------------------------ calls

    def _covered(self, f: Frame) -> bool:
        return f.block.handler_for(self.node) is not None

    def _callee(self, v) -> ObjectRecord | None:
        if isinstance(v, Ref):
            obj = self.heap.get(v)
            if obj.callable:
                return obj
        return None

    def _enter(self, f: Frame, fobj: ObjectRecord, fref: Ref, this: LabeledValue, args: list[LabeledValue], **kw) -> Frame:
        """Push a frame for a user function; the pc entry must already be pushed."""
        block = fobj.function.block
        handler = f.handler_on_stack or self._covered(f)
        pc = self.pc()
        nf = self._new_frame(block, handler, fobj.function.scope, pc)
        nf.ret_node = self.node + 1
        nf.callee = fref
        nf.args = tuple(args)
        for k, v in kw.items():
            setattr(nf, k, v)
        incoming = [this, *args[: block.arg_count]]
        for i, lv in enumerate(incoming):
            nf.vals[i] = lv.value
            nf.labs[i] = self.j(lv.label, pc) if self.ifc else BOTTOM
            if nf.labs[i] != pc:
                nf.sparse = False
        if not self.ifc:
            nf.labs = [BOTTOM] * len(nf.labs)
        self.frames.append(nf)
        self.node = 0
        return nf

    def _call_common(self, f: Frame, row, construct: bool) -> None:
        _, func, argc, base = row
        self._star(f.labs[func], "called function")
        fv = f.vals[func]
        fobj = self._callee(fv)
        lf = fobj.struct_label if fobj is not None else BOTTOM
        self.push_pc(self.j(self.j(lf, f.labs[func]), self.pc()), self._covered(f))
        if fobj is None:
            return self._raise("TypeError: not a function", self.pc())
        if fobj.function is None:
            self._halt("runtime-type-error", f"host function {fobj.builtin} called without call-eval")
        args = [LabeledValue(f.vals[base + 1 + i], f.labs[base + 1 + i]) for i in range(argc)]
        if construct:
            this = LabeledValue(UNDEFINED, BOTTOM)
            self._enter(f, fobj, fv, this, args, constructing=True)
        else:
            this = LabeledValue(f.vals[base], f.labs[base])
            self._enter(f, fobj, fv, this, args)

    def op_call(self, f: Frame, row) -> None:
        self._call_common(f, row, False)

    def op_construct(self, f: Frame, row) -> None:
        self._call_common(f, row, True)

    def op_call_eval(self, f: Frame, row) -> None:
        _, func, argc, base = row
        fv = f.vals[func]
        if fv != EVAL_FUNCTION:
            return self._call_common(f, row, False)
        self._star(f.labs[func], "called function")
        arg = LabeledValue(f.vals[base + 1], f.labs[base + 1]) if argc >= 1 else LabeledValue(UNDEFINED, BOTTOM)
        self._star(arg.label, "eval argument")
        lf = self.heap.get(EVAL_FUNCTION).struct_label
        label = self.j(self.j(self.j(lf, f.labs[func]), arg.label), self.pc())
        self.push_pc(label, self._covered(f))
        if not isinstance(arg.value, str):
            self.gamma = LabeledValue(arg.value, self.j(arg.label, self.pc()))
            self.node += 1
            return
        try:
            blocks, strict = self._compile_eval(arg.value, f.block.strict)
        except SyntaxError as e:
            return self._raise(f"SyntaxError: {e}", self.pc())
        body = blocks[0]
        pc = self.pc()
        scope = f.scope
        depth_extra = 0
        if strict:
            env = VarEnv(body.variables, pc)
            scope = scope.push(env, pc)
            depth_extra = 1
        else:
            self._declare_eval_vars(scope, body.variables, pc)
        handler = f.handler_on_stack or self._covered(f)
        nf = self._new_frame(body, handler, scope, pc)
        nf.ret_node = self.node + 1
        nf.callee = EVAL_FUNCTION
        nf.scope_depth = depth_extra
        nf.vals[0] = f.vals[0]
        nf.labs[0] = self.j(f.labs[0], pc) if self.ifc else BOTTOM
        if nf.labs[0] != pc:
            nf.sparse = False
        self.frames.append(nf)
        self.node = 0

    def _compile_eval(self, source: str, strict: bool):
        key = (source, strict)
        cached = self._eval_cache.get(key)
        if cached is None:
            from .minijs import compile_eval

            self._eval_count += 1
            blocks, is_strict = compile_eval(source, strict=strict, prefix=f"eval{self._eval_count}")
            for b in blocks:
                self._register_block(b)
            cached = (blocks, is_strict)
            self._eval_cache[key] = cached
        return cached

    def _declare_eval_vars(self, scope: ScopeNode, names, pc: Label) -> None:
        node = scope
        while node is not None and not isinstance(node.obj, VarEnv) and node.obj != GLOBAL:
            node = node.next
        if node is None:
            node = ScopeNode(GLOBAL, BOTTOM)
        for name in names:
            if isinstance(node.obj, VarEnv):
                env = node.obj
                if env.index(name) >= 0:
                    continue
                if self.ifc and not pc.leq(env.struct_label):
                    self._halt("ifc-scope-violation", f"eval declares {name!r} under a higher context")
                env.add(name, pc)
            else:
                g = self.heap.get(GLOBAL)
                if name in g.props:
                    continue
                if self.ifc and not pc.leq(g.struct_label):
                    self._halt("ifc-heap-star-write", f"eval declares global {name!r} under a higher context")
                g.props[name] = Property(UNDEFINED, pc)

    def _return(self, value: LabeledValue) -> None:
        """Pop the current frame and deliver ``value`` to the caller."""
        f = self.frames.pop()
        if f.constructing and not isinstance(value.value, Ref):
            value = LabeledValue(f.vals[0], self.j(f.labs[0], self.pc()))
        caller = self.frames[-1]
        self.node = f.ret_node
        # leave the callee's context before delivering a getter result to a register
        self.is_ipd()
        if f.getter:
            self.put(caller, f.dreg, value.value, value.label)
        elif not f.discard:
            self.gamma = value

    def op_ret(self, f: Frame, row) -> None:
        value = LabeledValue(f.vals[row[1]], self.j(f.labs[row[1]], self.pc()))
        if len(self.frames) == 1:
            self._finish(value)
            return
        if f.cfg.sen is not None:
            f.pending = value
            self.node = f.cfg.sen
        else:
            self._return(value)

    def _sen(self) -> None:
        f = self.frame
        if self.exc is None:
            self._return(f.pending)
            return
        self.frames.pop()
        self.node = f.ret_node - 1  # the call site that raised
        self._throw()

    def op_end(self, f: Frame, row) -> None:
        self._finish(LabeledValue(f.vals[row[1]], self.j(f.labs[row[1]], self.pc())))

    def _finish(self, value: LabeledValue) -> None:
        self.value = value
        self.node = self.frame.cfg.sink
        self.is_ipd()
        self.status = "end"

    # ------------------------------------------------------------ simple ops

    def op_enter(self, f: Frame, row) -> None:
        self.node += 1

    def op_mov(self, f: Frame, row) -> None:
        _, dst, src, const = row
        if src is None:
            self.put(f, dst, const)
        else:
            self.put(f, dst, f.vals[src], f.labs[src])
        self.node += 1

    def op_prim(self, f: Frame, row) -> None:
        if len(row) == 5:
            _, dst, op, a, b = row
            self.put(f, dst, apply_prim(op, f.vals[a], f.vals[b]), f.labs[a], f.labs[b])
        else:
            _, dst, op, a = row
            self.put(f, dst, apply_prim(op, f.vals[a]), f.labs[a])
        self.node += 1

    def op_jfalse(self, f: Frame, row) -> None:
        _, cond, target = row
        self._star(f.labs[cond], "branch condition")
        self.push_pc(f.labs[cond])
        self.node = self.node + 1 if truthy(f.vals[cond]) else target

    def op_loop_if_less(self, f: Frame, row) -> None:
        _, a, b, target = row
        self._star(f.labs[a], "loop bound")
        self._star(f.labs[b], "loop bound")
        la, lb = f.labs[a], f.labs[b]
        self.push_pc(la if f.sparse and lb.leq(la) else self.j(la, lb))
        self.node = target if apply_prim("less", f.vals[a], f.vals[b]) else self.node + 1

    def op_jmp(self, f: Frame, row) -> None:
        self.node = row[1]

    def op_typeof(self, f: Frame, row) -> None:
        _, dst, src = row
        v = f.vals[src]
        self.put(f, dst, type_name(v, self._callee(v) is not None), f.labs[src])
        self.node += 1

    def op_instanceof(self, f: Frame, row) -> None:
        _, dst, value, proto = row
        v, p = f.vals[value], f.vals[proto]
        label = self.j(f.labs[value], f.labs[proto])
        answer = False
        if isinstance(v, Ref) and isinstance(p, Ref):
            obj = self.heap.get(v)
            label = self.j(label, obj.struct_label)
            while obj.proto is not None:
                label = self.j(label, obj.proto_label)
                if obj.proto == p:
                    answer = True
                    break
                obj = self.heap.get(obj.proto)
                label = self.j(label, obj.struct_label)
        self.put(f, dst, answer, label)
        self.node += 1

    def op_call_put_result(self, f: Frame, row) -> None:
        self.put(f, row[1], self.gamma.value, self.gamma.label)
        self.node += 1

    def op_catch(self, f: Frame, row) -> None:
        exc = self.exc or LabeledValue(UNDEFINED, BOTTOM)
        self.put(f, row[1], exc.value, exc.label)
        self.exc = None
        self.node += 1

    def op_throw(self, f: Frame, row) -> None:
        r = row[1]
        self.exc = LabeledValue(f.vals[r], self.j(f.labs[r], self.pc()))
        self._throw()

    # ------------------------------------------------------------ allocation

    def _alloc(self, proto: Ref | None, proto_label: Label, **kw) -> Ref:
        pc = self.pc() if self.ifc else BOTTOM
        return self.heap.allocate(ObjectRecord(proto=proto, proto_label=proto_label, struct_label=pc, **kw))

    def op_new_object(self, f: Frame, row) -> None:
        ref = self._alloc(OBJECT_PROTOTYPE, self.pc())
        self.put(f, row[1], ref)
        self.node += 1

    def op_new_func(self, f: Frame, row) -> None:
        _, dst, name = row
        block = self.blocks.get(name)
        if block is None:
            raise VMError(f"unknown function {name!r}")
        pc = self.pc()
        lf = self.j(pc, self._domain_label(block))
        fref = self.heap.allocate(ObjectRecord(
            proto=OBJECT_PROTOTYPE, proto_label=pc, struct_label=lf,
            function=FunctionPart(block, f.scope), kind="function",
        ))
        pref = self._alloc(OBJECT_PROTOTYPE, pc)
        self.heap.get(fref).props["prototype"] = Property(pref, pc)
        self.put(f, dst, fref, lf)
        self.node += 1

    def op_create_this(self, f: Frame, row) -> None:
        if f.constructing and f.callee is not None:
            pc = self.pc()
            look = self.heap.lookup(f.callee, "prototype", pc, self.j)
            proto = look.value if isinstance(look.value, Ref) else OBJECT_PROTOTYPE
            lp = self.j(self.j(self.heap.get(proto).struct_label, look.label), pc)
            ref = self._alloc(proto, lp)
            self.put(f, row[1], ref)
        elif not f.block.strict and f.vals[row[1]] in (UNDEFINED, NULL):
            # sloppy-mode functions see the global object instead of a missing receiver
            self.put(f, row[1], GLOBAL, f.labs[row[1]])
        self.node += 1

    def op_create_arguments(self, f: Frame, row) -> None:
        pc = self.pc()
        ref = self._alloc(OBJECT_PROTOTYPE, pc, kind="arguments")
        obj = self.heap.get(ref)
        for i, lv in enumerate(f.args):
            obj.props[str(i)] = Property(lv.value, self.j(lv.label, pc))
        obj.props["length"] = Property(len(f.args), pc)
        self.put(f, row[1], ref)
        self.node += 1

    def op_create_activation(self, f: Frame, row) -> None:
        pc = self.pc()
        if f.activation is None:
            if not self.ifc or pc.leq(f.scope_label):
                link = pc
                f.scope_label = pc
            elif f.scope_label.star:
                link = pc.with_star()
            else:
                self._halt("ifc-scope-violation", "activation created under a context above the scope label")
            env = VarEnv(f.block.variables, pc)
            f.activation = env
            f.scope = ScopeNode(env, link, f.scope)
            f.scope_depth += 1
        self.put(f, row[1], EnvRef(f.activation))
        self.node += 1

    # ------------------------------------------------------------ properties

    def _object_of(self, f: Frame, reg: int, what: str) -> Ref | None:
        v = f.vals[reg]
        if v is UNDEFINED or v is NULL or v is EMPTY:
            self._raise(f"TypeError: cannot {what} of {v!r}", f.labs[reg])
            return None
        return v

    def op_get_by_id(self, f: Frame, row) -> None:
        _, dst, base, name = row
        bv = self._object_of(f, base, f"read property {name!r}")
        if bv is None:
            return
        pc = self.pc()
        ctx = self.j(f.labs[base], pc)
        if isinstance(bv, Ref):
            look = self.heap.lookup(bv, name, ctx, self.j)
            prop = look.prop
            if prop is not None and prop.accessor:
                if prop.getter is None:
                    self.put(f, dst, UNDEFINED, look.label)
                    self.node += 1
                    return
                gobj = self.heap.get(prop.getter)
                self.push_pc(self.j(look.label, gobj.struct_label), self._covered(f))
                self._enter(f, gobj, prop.getter, LabeledValue(bv, f.labs[base]), [], getter=True, dreg=dst)
                return
            self.put(f, dst, look.value, look.label)
        elif isinstance(bv, EnvRef):
            env = bv.env
            i = env.index(name)
            value, lab = (env.vals[i], env.labs[i]) if i >= 0 else (UNDEFINED, BOTTOM)
            self.put(f, dst, value, ctx, env.struct_label, lab)
        elif isinstance(bv, str) and name == "length":
            self.put(f, dst, len(bv), ctx)
        else:
            self.put(f, dst, UNDEFINED, ctx)
        self.node += 1

    def _check_heap_value(self, label: Label, what: str) -> None:
        if label.star:
            self._halt("ifc-heap-star-write", f"{what} carries a star label")

    def op_put_by_id(self, f: Frame, row) -> None:
        _, base, name, value, direct = row
        self._check_heap_value(f.labs[value], f"value stored to {name!r}")
        self._star(f.labs[base], "property base")
        bv = self._object_of(f, base, f"set property {name!r}")
        if bv is None:
            return
        pc = self.pc()
        ctx = self.j(f.labs[base], pc)
        vl = f.labs[value]
        if isinstance(bv, EnvRef):
            env = bv.env
            i = env.index(name)
            if i < 0:
                raise VMError(f"variable {name!r} vanished from its environment")
            lab = self.j(self.j(vl, ctx), env.struct_label)
            if self.ifc and not ctx.leq(env.labs[i]):
                lab = lab.with_star()
            env.vals[i] = f.vals[value]
            env.labs[i] = lab
            self.node += 1
            return
        if not isinstance(bv, Ref):
            self.node += 1  # writes to primitives are dropped
            return
        obj = self.heap.get(bv)
        own = obj.props.get(name)
        if not direct:
            look = self.heap.lookup(bv, name, ctx, self.j)
            if look.prop is not None and look.prop.accessor:
                setter = look.prop.setter
                if setter is None:
                    self.node += 1
                    return
                sobj = self.heap.get(setter)
                self.push_pc(self.j(look.label, sobj.struct_label), self._covered(f))
                self._enter(f, sobj, setter, LabeledValue(bv, f.labs[base]),
                            [LabeledValue(f.vals[value], vl)], discard=True)
                return
            if own is None:
                # whether the write creates a property depends on the whole chain
                ctx = self.j(ctx, look.label)
        if own is not None and not own.accessor:
            if self.ifc and not ctx.leq(own.label):
                self._halt("ifc-heap-star-write", f"write to {name!r} under a context above its label")
            own.value = f.vals[value]
            own.label = self.j(vl, ctx)
        else:
            if self.ifc and not ctx.leq(obj.struct_label):
                self._halt("ifc-heap-star-write", f"new property {name!r} under a context above the structure label")
            if own is not None and self.ifc and not ctx.leq(own.label):
                self._halt("ifc-heap-star-write", f"write to {name!r} under a context above its label")
            obj.props[name] = Property(f.vals[value], self.j(vl, ctx))
            obj.struct_label = self.j(obj.struct_label, ctx)
        self.node += 1

    def op_del_by_id(self, f: Frame, row) -> None:
        _, dst, base, name = row
        self._star(f.labs[base], "property base")
        bv = self._object_of(f, base, f"delete property {name!r}")
        if bv is None:
            return
        pc = self.pc()
        ctx = self.j(f.labs[base], pc)
        if not isinstance(bv, Ref):
            self.put(f, dst, True, ctx)
            self.node += 1
            return
        obj = self.heap.get(bv)
        own = obj.props.get(name)
        label = self.j(ctx, obj.struct_label)
        if own is None:
            self.put(f, dst, True, label)
        else:
            if self.ifc and not (ctx.leq(own.label) and ctx.leq(obj.struct_label)):
                self._halt("ifc-scope-violation", f"delete of {name!r} under a context above its labels")
            del obj.props[name]
            self.put(f, dst, True, self.j(label, own.label))
        self.node += 1

    def op_put_getter_setter(self, f: Frame, row) -> None:
        _, base, name, getter, setter = row
        self._check_heap_value(f.labs[getter], "getter")
        self._check_heap_value(f.labs[setter], "setter")
        self._star(f.labs[base], "property base")
        bv = f.vals[base]
        if not isinstance(bv, Ref):
            return self._raise("TypeError: accessor on a non-object", f.labs[base])
        pc = self.pc()
        ctx = self.j(f.labs[base], pc)
        obj = self.heap.get(bv)
        own = obj.props.get(name)
        if self.ifc and (not ctx.leq(obj.struct_label) or (own is not None and not ctx.leq(own.label))):
            self._halt("ifc-heap-star-write", f"accessor {name!r} installed under a context above the object labels")
        g = f.vals[getter] if isinstance(f.vals[getter], Ref) else None
        s = f.vals[setter] if isinstance(f.vals[setter], Ref) else None
        if own is not None and own.accessor:
            g = g or own.getter
            s = s or own.setter
        label = self.j(self.j(ctx, f.labs[getter]), f.labs[setter])
        obj.props[name] = Property(UNDEFINED, label, g, s, accessor=True)
        obj.struct_label = self.j(obj.struct_label, ctx)
        self.node += 1

    def op_get_pnames(self, f: Frame, row) -> None:
        _, dst, base, i, size, brk = row
        self._star(f.labs[base], "enumerated object")
        bv = f.vals[base]
        bl = f.labs[base]
        if isinstance(bv, Ref):
            obj = self.heap.get(bv)
            label = self.j(bl, obj.struct_label)
            names = []
            for name, p in obj.props.items():
                label = self.j(label, p.label)
                if p.enumerable:
                    names.append(name)
            self.put(f, dst, PropIter(tuple(names)), label)
            self.put(f, i, 0, label)
            self.put(f, size, len(names), label)
            self.push_pc(label)
            self.node += 1
        else:
            if bv is UNDEFINED or bv is NULL:
                for r in (dst, i, size):
                    self.put(f, r, UNDEFINED, bl)
                self.push_pc(bl)
                self.node = brk
            else:
                self.put(f, dst, PropIter(()), bl)
                self.put(f, i, 0, bl)
                self.put(f, size, 0, bl)
                self.push_pc(bl)
                self.node += 1

    def op_next_pname(self, f: Frame, row) -> None:
        _, dst, base, i, size, it, target = row
        for r in (i, size, it):
            self._star(f.labs[r], "enumeration state")
        b = to_number(f.vals[i])
        e = to_number(f.vals[size])
        names = f.vals[it].names if isinstance(f.vals[it], PropIter) else ()
        if isinstance(b, (int, float)) and b < e and int(b) < len(names):
            k = int(b)
            self.put(f, dst, names[k], f.labs[it], f.labs[i], f.labs[size])
            self.put(f, i, k + 1, f.labs[i])
            self.node = target
        else:
            self.node += 1

    # ------------------------------------------------------------ scope chain

    def _node_struct(self, node: ScopeNode) -> Label:
        obj = node.obj
        if isinstance(obj, VarEnv):
            return obj.struct_label
        return self.heap.get(obj).struct_label

    def _find(self, node: ScopeNode | None, name: str, ctx: Label):
        """Search the chain from ``node``; returns (scope node or None, value, label)."""
        while node is not None:
            ctx = self.j(self.j(ctx, node.label), self._node_struct(node))
            obj = node.obj
            if isinstance(obj, VarEnv):
                i = obj.index(name)
                if i >= 0:
                    return node, obj.vals[i], self.j(ctx, obj.labs[i])
            else:
                look = self.heap.lookup(obj, name, ctx, self.j)
                if look.found:
                    return node, look.value, look.label
                ctx = look.label
            node = node.next
        return None, UNDEFINED, ctx

    def _skip(self, node: ScopeNode | None, skip: int, ctx: Label):
        for _ in range(skip):
            if node is None:
                raise VMError("scope chain shorter than skip count")
            ctx = self.j(self.j(ctx, node.label), self._node_struct(node))
            node = node.next
        return node, ctx

    def op_resolve(self, f: Frame, row) -> None:
        _, dst, name = row
        hit, value, label = self._find(f.scope, name, self.pc())
        if hit is None:
            return self._raise(f"ReferenceError: {name} is not defined", label)
        self.put(f, dst, value, label)
        self.node += 1

    def op_resolve_skip(self, f: Frame, row) -> None:
        _, dst, name, skip = row
        start, ctx = self._skip(f.scope, skip, self.pc())
        hit, value, label = self._find(start, name, ctx)
        if hit is None:
            return self._raise(f"ReferenceError: {name} is not defined", label)
        self.put(f, dst, value, label)
        self.node += 1

    def op_resolve_global(self, f: Frame, row) -> None:
        _, dst, name = row
        look = self.heap.lookup(GLOBAL, name, self.pc(), self.j)
        self.put(f, dst, look.value, look.label)
        self.node += 1

    def op_resolve_base(self, f: Frame, row) -> None:
        _, dst, name, strict = row
        hit, _, label = self._find(f.scope, name, self.pc())
        if hit is None:
            base = EMPTY if strict else GLOBAL
        elif isinstance(hit.obj, VarEnv):
            base = EnvRef(hit.obj)
        else:
            base = hit.obj
        self.put(f, dst, base, label)
        self.node += 1

    def op_resolve_with_base(self, f: Frame, row) -> None:
        _, bdst, pdst, name = row
        hit, value, label = self._find(f.scope, name, self.pc())
        if hit is None:
            return self._raise(f"ReferenceError: {name} is not defined", label)
        base = UNDEFINED if isinstance(hit.obj, VarEnv) else hit.obj
        self.put(f, bdst, base, label)
        self.put(f, pdst, value, label)
        self.node += 1

    def _env_at(self, f: Frame, index: int, skip: int):
        node, ctx = self._skip(f.scope, skip, self.pc())
        if node is None or not isinstance(node.obj, VarEnv) or index >= len(node.obj.names):
            raise VMError(f"no variable slot {index} at scope depth {skip}")
        ctx = self.j(self.j(ctx, node.label), node.obj.struct_label)
        return node.obj, ctx

    def op_get_scoped_var(self, f: Frame, row) -> None:
        _, dst, index, skip = row
        env, ctx = self._env_at(f, index, skip)
        self.put(f, dst, env.vals[index], ctx, env.labs[index])
        self.node += 1

    def op_put_scoped_var(self, f: Frame, row) -> None:
        _, index, skip, value = row
        self._star(f.labs[value], "value stored to a scoped variable")
        env, ctx = self._env_at(f, index, skip)
        lab = self.j(f.labs[value], ctx)
        if self.ifc and not ctx.leq(env.labs[index]):
            lab = lab.with_star()
        env.vals[index] = f.vals[value]
        env.labs[index] = lab
        self.node += 1

    def op_push_scope(self, f: Frame, row) -> None:
        r = row[1]
        self._star(f.labs[r], "scope object")
        v = f.vals[r]
        if not isinstance(v, Ref):
            return self._raise("TypeError: with on a non-object", f.labs[r])
        pc = self.pc()
        link = self.j(pc, f.labs[r])
        head = f.scope.label if f.scope is not None else BOTTOM
        if self.ifc and not pc.leq(head):
            link = link.with_star()
        f.scope = ScopeNode(v, link, f.scope)
        f.scope_depth += 1
        self.node += 1

    def _pop_scope(self, f: Frame) -> None:
        if f.scope_depth <= 0:
            raise VMError("pop-scope on an empty frame scope")
        if self.ifc and not self.pc().leq(f.scope.label):
            self._halt("ifc-scope-violation", "scope popped under a context above its link label")
        f.scope = f.scope.next
        f.scope_depth -= 1

    def op_pop_scope(self, f: Frame, row) -> None:
        self._pop_scope(f)
        self.node += 1

    def op_jmp_scope(self, f: Frame, row) -> None:
        _, count, target = row
        for _ in range(count):
            self._pop_scope(f)
        self.node = target


_HANDLERS = {
    name: "op_" + name.replace("-", "_")
    for name in (
        "enter", "mov", "prim", "jfalse", "loop-if-less", "jmp", "typeof", "instanceof",
        "ret", "end", "call", "call-put-result", "call-eval", "construct", "create-arguments",
        "create-activation", "create-this", "new-object", "new-func", "get-by-id", "put-by-id",
        "del-by-id", "put-getter-setter", "get-pnames", "next-pname", "resolve", "resolve-skip",
        "resolve-global", "resolve-base", "resolve-with-base", "get-scoped-var", "put-scoped-var",
        "push-scope", "pop-scope", "jmp-scope", "throw", "catch",
    )
}


def run_program(program: Program, inputs=None, **kwargs) -> Result:
    max_steps = kwargs.pop("max_steps", None)
    return Machine(program, inputs, **kwargs).run(max_steps)
