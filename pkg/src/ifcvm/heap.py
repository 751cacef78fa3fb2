"""Labeled values, objects, variable environments, scope chains, and the store."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .labels import BOTTOM, DomainRegistry, Label, format_label
from .values import EMPTY, NULL, UNDEFINED, EnvRef, PropIter, Ref, is_number

GLOBAL = Ref(1)
OBJECT_PROTOTYPE = Ref(2)
EVAL_FUNCTION = Ref(3)


@dataclass(frozen=True, slots=True)
class LabeledValue:
    value: object
    label: Label = BOTTOM


@dataclass(slots=True)
class Property:
    """A data property (value, label) or an accessor (getter/setter locations).

    Attribute flags are modeled but frozen to true.
    """

    value: object
    label: Label
    getter: Ref | None = None
    setter: Ref | None = None
    accessor: bool = False
    writable: bool = True
    enumerable: bool = True
    configurable: bool = True


_env_ids = itertools.count(1)


class VarEnv:
    """A variable environment: named slots holding labeled values."""

    __slots__ = ("names", "vals", "labs", "struct_label", "uid")

    def __init__(self, names, label: Label = BOTTOM) -> None:
        self.names: list[str] = list(names)
        self.vals: list = [UNDEFINED] * len(self.names)
        self.labs: list[Label] = [label] * len(self.names)
        self.struct_label = label
        self.uid = next(_env_ids)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            return -1

    def add(self, name: str, label: Label) -> int:
        self.names.append(name)
        self.vals.append(UNDEFINED)
        self.labs.append(label)
        return len(self.names) - 1

    def __repr__(self) -> str:
        return f"<env {self.uid} {self.names}>"


@dataclass(frozen=True, slots=True)
class ScopeNode:
    """One link of a scope chain; ``label`` guards the link to ``obj``."""

    obj: Ref | VarEnv
    label: Label
    next: ScopeNode | None = None

    def push(self, obj, label: Label) -> ScopeNode:
        return ScopeNode(obj, label, self)

    def nodes(self) -> list[ScopeNode]:
        out = []
        n = self
        while n is not None:
            out.append(n)
            n = n.next
        return out

    def __len__(self) -> int:
        k = 0
        n = self
        while n is not None:
            k += 1
            n = n.next
        return k


@dataclass(slots=True)
class FunctionPart:
    block: object  # CodeBlock
    scope: ScopeNode | None


@dataclass(slots=True)
class ObjectRecord:
    props: dict[str, Property] = field(default_factory=dict)
    proto: Ref | None = None
    proto_label: Label = BOTTOM
    struct_label: Label = BOTTOM
    function: FunctionPart | None = None
    builtin: str | None = None
    kind: str = "object"

    @property
    def callable(self) -> bool:
        return self.function is not None or self.builtin is not None


@dataclass(slots=True)
class Lookup:
    """Result of a prototype-chain walk."""

    found: bool
    value: object
    label: Label
    prop: Property | None = None
    holder: Ref | None = None


class Heap:
    """Locations are allocated from 1 upward and never reused."""

    def __init__(self) -> None:
        self.objects: dict[int, ObjectRecord] = {}
        self.next_loc = 1

    def allocate(self, obj: ObjectRecord) -> Ref:
        loc = self.next_loc
        self.next_loc += 1
        self.objects[loc] = obj
        return Ref(loc)

    def get(self, ref: Ref) -> ObjectRecord:
        return self.objects[ref.loc]

    def __contains__(self, ref: Ref) -> bool:
        return isinstance(ref, Ref) and ref.loc in self.objects

    def __len__(self) -> int:
        return len(self.objects)

    def lookup(self, start: Ref, name: str, label: Label, join=None) -> Lookup:
        """Walk the prototype chain from ``start`` looking for ``name``.

        The result label joins ``label`` with the structure label of every
        visited object, the link label of every traversed prototype pointer,
        and the property's own label. ``join`` lets the caller count or
        suppress joins; it defaults to the lattice join.
        """
        j = join or Label.join
        obj = self.objects[start.loc]
        ref = start
        label = j(label, obj.struct_label)
        while True:
            prop = obj.props.get(name)
            if prop is not None:
                return Lookup(True, prop.value, j(label, prop.label), prop, ref)
            if obj.proto is None:
                return Lookup(False, UNDEFINED, label)
            label = j(label, obj.proto_label)
            ref = obj.proto
            obj = self.objects[ref.loc]
            label = j(label, obj.struct_label)

    def star_violations(self) -> list[str]:
        """Places where a star-bearing label is stored in an object."""
        out = []
        for loc, obj in self.objects.items():
            if obj.struct_label.star or obj.proto_label.star:
                out.append(f"@{loc} structure/prototype label")
            for name, p in obj.props.items():
                if p.label.star:
                    out.append(f"@{loc}.{name}")
        return out


def bootstrap_heap() -> Heap:
    """A heap holding the global object, Object.prototype, and eval."""
    h = Heap()
    h.allocate(ObjectRecord(proto=OBJECT_PROTOTYPE, kind="global"))
    h.allocate(ObjectRecord(kind="object-prototype"))
    h.allocate(ObjectRecord(proto=OBJECT_PROTOTYPE, builtin="eval", kind="function"))
    h.get(GLOBAL).props["eval"] = Property(EVAL_FUNCTION, BOTTOM)
    return h


# ---------------------------------------------------------------- rendering

def render_value(v):
    """JSON-friendly rendering of a runtime value."""
    if v is UNDEFINED:
        return {"$": "undefined"}
    if v is NULL:
        return None
    if v is EMPTY:
        return {"$": "empty"}
    if isinstance(v, bool) or isinstance(v, str):
        return v
    if is_number(v):
        if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
            return {"$": "NaN" if math.isnan(v) else ("Infinity" if v > 0 else "-Infinity")}
        return v
    if isinstance(v, Ref):
        return {"$ref": v.loc}
    if isinstance(v, PropIter):
        return {"$iter": list(v.names)}
    if isinstance(v, EnvRef):
        return {"$": "env"}
    return {"$": repr(v)}


def dump_heap(heap: Heap, registry: DomainRegistry | None = None, observer: Label | None = None) -> dict:
    """Deterministic dictionary view of the heap.

    With an ``observer``, values whose labels are not visible to it are
    replaced by ``{"$": "hidden"}``.
    """
    def show(value, label):
        if observer is not None and not label.leq(observer):
            return {"$": "hidden"}
        return render_value(value)

    out = {}
    for loc in sorted(heap.objects):
        obj = heap.objects[loc]
        entry = {
            "kind": obj.kind,
            "struct": format_label(obj.struct_label, registry),
            "proto": obj.proto.loc if obj.proto else None,
            "proto_label": format_label(obj.proto_label, registry),
        }
        if obj.function is not None:
            entry["function"] = obj.function.block.name
        props = {}
        for name, p in obj.props.items():
            if p.accessor:
                item = {
                    "getter": p.getter.loc if p.getter else None,
                    "setter": p.setter.loc if p.setter else None,
                }
            else:
                item = {"value": show(p.value, p.label)}
            item["label"] = format_label(p.label, registry)
            props[name] = item
        entry["props"] = props
        out[str(loc)] = entry
    return out


def dump_heap_json(heap: Heap, registry: DomainRegistry | None = None, observer: Label | None = None) -> str:
    return json.dumps(dump_heap(heap, registry, observer), indent=2, sort_keys=False)
