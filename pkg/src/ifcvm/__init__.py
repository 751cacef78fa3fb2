"""A bytecode interpreter with dynamic information flow control."""

from .labels import BOTTOM, DomainRegistry, Label, parse_label
from .bytecode import CodeBlock, Program, parse_assembly, serialize_assembly, validate
from .cfg import build_cfg
from .interpreter import Machine, Result, run_program

__all__ = [
    "BOTTOM", "CodeBlock", "DomainRegistry", "Label", "Machine", "Program", "Result",
    "build_cfg", "parse_assembly", "parse_label", "run_program", "serialize_assembly", "validate",
]
