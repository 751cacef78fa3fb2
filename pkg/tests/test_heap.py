from __future__ import annotations

from ifcvm.heap import (
    EVAL_FUNCTION,
    GLOBAL,
    OBJECT_PROTOTYPE,
    ObjectRecord,
    Property,
    ScopeNode,
    VarEnv,
    bootstrap_heap,
    dump_heap,
    dump_heap_json,
    render_value,
)
from ifcvm.labels import BOTTOM, DomainRegistry
from ifcvm.values import NULL, UNDEFINED, Ref

REG = DomainRegistry(["a", "b", "c"])
A, B, C = (REG.label(n) for n in "abc")


def _chain():
    heap = bootstrap_heap()
    proto = heap.allocate(ObjectRecord(props={"p": Property(1, C)}, proto=OBJECT_PROTOTYPE, struct_label=B))
    child = heap.allocate(ObjectRecord(proto=proto, proto_label=A))
    return heap, proto, child


def test_bootstrap_layout():
    heap = bootstrap_heap()
    assert len(heap) == 3
    assert heap.get(GLOBAL).kind == "global"
    assert heap.get(GLOBAL).props["eval"].value == EVAL_FUNCTION
    assert heap.get(EVAL_FUNCTION).callable


def test_lookup_joins_every_label_on_the_path():
    heap, proto, child = _chain()
    look = heap.lookup(child, "p", BOTTOM)
    assert look.found and look.value == 1 and look.holder == proto
    assert look.label == A | B | C


def test_missing_property_still_carries_path_labels():
    heap, _, child = _chain()
    look = heap.lookup(child, "nope", BOTTOM)
    assert not look.found and look.value is UNDEFINED
    assert look.label == A | B


def test_lookup_join_hook_counts_calls():
    heap, _, child = _chain()
    calls = []

    def join(x, y):
        calls.append(1)
        return x.join(y)

    heap.lookup(child, "p", BOTTOM, join)
    assert len(calls) >= 4


def test_locations_are_never_reused():
    heap = bootstrap_heap()
    r1 = heap.allocate(ObjectRecord())
    r2 = heap.allocate(ObjectRecord())
    assert r2.loc == r1.loc + 1 and r1 in heap and Ref(99) not in heap


def test_star_violations():
    heap, proto, child = _chain()
    assert heap.star_violations() == []
    heap.get(child).props["x"] = Property(1, A.with_star())
    heap.get(proto).struct_label = B.with_star()
    found = heap.star_violations()
    assert f"@{child.loc}.x" in found and any("structure" in f for f in found)


def test_dump_hides_values_above_observer():
    heap, _, child = _chain()
    heap.get(child).props["s"] = Property("secret", A)
    heap.get(child).props["l"] = Property("public", BOTTOM)
    full = dump_heap(heap, REG)
    seen = dump_heap(heap, REG, BOTTOM)
    entry = seen[str(child.loc)]
    assert entry["props"]["s"] == {"value": {"$": "hidden"}, "label": "{a}"}
    assert entry["props"]["l"]["value"] == "public"
    assert full[str(child.loc)]["props"]["s"]["value"] == "secret"
    assert entry["proto_label"] == "{a}"
    assert dump_heap_json(heap, REG) == dump_heap_json(heap, REG)


def test_render_value():
    assert render_value(UNDEFINED) == {"$": "undefined"}
    assert render_value(NULL) is None
    assert render_value(Ref(4)) == {"$ref": 4}
    assert render_value(float("nan")) == {"$": "NaN"}
    assert render_value(3) == 3 and render_value("s") == "s"


def test_var_env_and_scope_chain():
    env = VarEnv(["x", "y"])
    assert env.index("y") == 1
    i = env.add("z", A)
    assert env.names[i] == "z"
    chain = ScopeNode(GLOBAL, BOTTOM).push(env, A)
    assert len(chain) == 2
    assert [n.obj for n in chain.nodes()][0] is env
