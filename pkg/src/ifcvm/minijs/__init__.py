"""A small JavaScript-like source language and its bytecode compiler."""

from .ast import Program as Ast
from .compiler import CompileError, compile_eval, compile_program
from .parser import MiniJSError, parse, to_source

compile = compile_program

__all__ = ["Ast", "CompileError", "MiniJSError", "compile", "compile_eval", "compile_program", "parse", "to_source"]
