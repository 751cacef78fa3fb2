from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifcvm.labels import BOTTOM, MAX_DOMAINS, DomainRegistry, Label, LabelError, format_label, parse_label, visible

labels = st.builds(Label, st.integers(0, 2**8 - 1), st.booleans())
wide_labels = st.builds(Label, st.integers(0, 2**MAX_DOMAINS - 1), st.booleans())


@settings(max_examples=10_000, deadline=None)
@given(wide_labels, wide_labels, wide_labels)
def test_lattice_laws_on_full_width_labels(a, b, c):
    assert a.join(b) == b.join(a)
    assert a.join(b).join(c) == a.join(b.join(c))
    assert a.join(a) == a and a.join(BOTTOM) == a
    assert a.leq(a.join(b)) and b.leq(a.join(b))
    assert a.leq(b) == (a.join(b) == b)
    if a.leq(c) and b.leq(c):
        assert a.join(b).leq(c)
    if a.leq(b) and b.leq(a):
        assert a == b


@given(labels, labels)
def test_join_commutative(a, b):
    assert a.join(b) == b.join(a)


@given(labels, labels, labels)
def test_join_associative(a, b, c):
    assert a.join(b).join(c) == a.join(b.join(c))


@given(labels)
def test_join_idempotent_and_bottom_identity(a):
    assert a.join(a) == a
    assert a.join(BOTTOM) == a
    assert a | BOTTOM == a


@given(labels, labels)
def test_join_is_least_upper_bound(a, b):
    j = a.join(b)
    assert a.leq(j) and b.leq(j)


@given(labels, labels, labels)
def test_join_below_every_upper_bound(a, b, c):
    if a.leq(c) and b.leq(c):
        assert a.join(b).leq(c)


@given(labels, labels)
def test_leq_agrees_with_join(a, b):
    assert a.leq(b) == (a.join(b) == b)


@given(labels, labels)
def test_leq_antisymmetric(a, b):
    if a.leq(b) and b.leq(a):
        assert a == b


@given(labels)
def test_star_is_absorbing_and_above(a):
    s = a.with_star()
    assert s.star and a.leq(s)
    assert a.join(s).star


def test_star_not_below_star_free():
    reg = DomainRegistry(["h"])
    assert not reg.label("h", star=True).leq(reg.label("h"))
    assert not Label(0, True).leq(BOTTOM)


def test_visible_to_observer():
    reg = DomainRegistry(["a", "b"])
    assert visible(reg.label("a"), reg.label("a", "b"))
    assert not visible(reg.label("b"), reg.label("a"))
    assert not visible(reg.label("a", star=True), reg.label("a", "b"))
    with pytest.raises(LabelError):
        visible(BOTTOM, Label(0, True))


def test_parse_and_format_round_trip():
    reg = DomainRegistry()
    for text in ["low", "low*", "{h}", "{a,b}*", "{x.y,z-1}"]:
        lab = parse_label(text, reg)
        assert parse_label(format_label(lab, reg), reg) == lab
    assert parse_label("{h,h}", reg) == parse_label("{h}", reg)
    assert format_label(parse_label("{ b , a }", reg), reg) in ("{a,b}", "{b,a}")


@pytest.mark.parametrize("bad", ["", "high", "{h", "{1x}", "low**", "{a b}"])
def test_parse_rejects_bad_syntax(bad):
    with pytest.raises(LabelError):
        parse_label(bad, DomainRegistry())


def test_registry_assigns_stable_bits():
    reg = DomainRegistry(["a"])
    assert reg.bit("a") == reg.bit("a")
    assert reg.bit("b") != reg.bit("a")
    assert reg.names[:2] == ("a", "b")
    assert reg.domains(reg.label("a", "b")) == ["a", "b"]


def test_registry_capacity():
    reg = DomainRegistry([f"d{i}" for i in range(MAX_DOMAINS)])
    assert reg.label(f"d{MAX_DOMAINS - 1}").bits == 1 << (MAX_DOMAINS - 1)
    with pytest.raises(LabelError, match="domains"):
        reg.bit("one-too-many")
