"""Compile protocol roles into straight-line procs, run them, and check their transcripts."""

from .compiler import CompileError, compile_role
from .frontend import example_role, parse_role, print_role
from .interpreter import ExecEnv, ExecFailure, Mode, exec_proc, honest_env
from .proc_ir import Proc, parse_proc, print_proc
from .semantics import Valuation, reflect_valuation, role_transcript_valid

__all__ = [
    "CompileError", "compile_role", "example_role", "parse_role", "print_role",
    "ExecEnv", "ExecFailure", "Mode", "exec_proc", "honest_env",
    "Proc", "parse_proc", "print_proc",
    "Valuation", "reflect_valuation", "role_transcript_valid",
]
