"""Security labels: a bitset of domains plus a star marker for partially leaked data."""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_DOMAINS = 64


class LabelError(ValueError):
    """Bad label text or too many domains."""


@dataclass(frozen=True, slots=True)
class Label:
    """A lattice element. ``bits`` holds one bit per domain; ``star`` marks partial leaks."""

    bits: int = 0
    star: bool = False

    def join(self, other: Label) -> Label:
        if other.bits == self.bits and other.star == self.star:
            return self
        return Label(self.bits | other.bits, self.star or other.star)

    def leq(self, other: Label) -> bool:
        return (self.bits & ~other.bits) == 0 and (not self.star or other.star)

    def with_star(self) -> Label:
        return self if self.star else Label(self.bits, True)

    @property
    def is_bottom(self) -> bool:
        return self.bits == 0 and not self.star

    def __or__(self, other: Label) -> Label:
        return self.join(other)


BOTTOM = Label()


def join(a: Label, b: Label) -> Label:
    return a.join(b)


def leq(a: Label, b: Label) -> bool:
    return a.leq(b)


def visible(label: Label, observer: Label) -> bool:
    """True when an observer at ``observer`` may see data labeled ``label``.

    Star-bearing labels are never visible: they are not below any star-free observer.
    """
    if observer.star:
        raise LabelError("observer label must not carry a star")
    return label.leq(observer)


class DomainRegistry:
    """Maps domain names to bit positions in first-seen order."""

    def __init__(self, names: tuple[str, ...] | list[str] = ()) -> None:
        self._names: list[str] = []
        self._bits: dict[str, int] = {}
        for name in names:
            self.bit(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def bit(self, name: str) -> int:
        if name in self._bits:
            return self._bits[name]
        if len(self._names) >= MAX_DOMAINS:
            raise LabelError(f"more than {MAX_DOMAINS} domains (adding {name!r})")
        self._bits[name] = 1 << len(self._names)
        self._names.append(name)
        return self._bits[name]

    def label(self, *names: str, star: bool = False) -> Label:
        bits = 0
        for name in names:
            bits |= self.bit(name)
        return Label(bits, star)

    def domains(self, label: Label) -> list[str]:
        out = []
        for i, name in enumerate(self._names):
            if label.bits >> i & 1:
                out.append(name)
        unknown = label.bits >> len(self._names)
        if unknown:
            # bits that were never registered; render them positionally
            pos = len(self._names)
            while unknown:
                if unknown & 1:
                    out.append(f"#{pos}")
                unknown >>= 1
                pos += 1
        return out

    def parse(self, text: str) -> Label:
        return parse_label(text, self)

    def format(self, label: Label) -> str:
        return format_label(label, self)


_LABEL_RE = re.compile(r"^\s*(low|\{([^{}]*)\})\s*(\*?)\s*$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")


def parse_label(text: str, registry: DomainRegistry) -> Label:
    """Parse ``low``, ``{d1,d2}`` or either followed by ``*``."""
    m = _LABEL_RE.match(text)
    if not m:
        raise LabelError(f"bad label syntax: {text!r}")
    star = m.group(3) == "*"
    if m.group(1) == "low":
        return Label(0, star)
    names = [n.strip() for n in m.group(2).split(",") if n.strip()]
    for name in names:
        if not _NAME_RE.match(name):
            raise LabelError(f"bad domain name {name!r} in {text!r}")
    return registry.label(*names, star=star)


def format_label(label: Label, registry: DomainRegistry | None = None) -> str:
    if label.bits == 0:
        body = "low"
    elif registry is None:
        body = "{" + ",".join(f"#{i}" for i in range(MAX_DOMAINS) if label.bits >> i & 1) + "}"
    else:
        body = "{" + ",".join(registry.domains(label)) + "}"
    return body + ("*" if label.star else "")
