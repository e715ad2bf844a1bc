"""Command line entry point.

Exit codes: 0 success, 1 compile/check/verification failure or a violation,
2 usage or input-format error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .compiler import CompileError, compile_role
from .derivability import Verdict, executability
from .errors import ParseError
from .frontend import (
    RoleFile, parse_role, parse_store, parse_transcript, print_store, print_transcript,
)
from .harness import reflect_campaign
from .interpreter import ExecEnv, ExecFailure, Mode, exec_proc, honest_env
from .proc_ir import parse_proc, print_proc
from .runtime import TagSource, parse_value_at
from .semantics import WitnessRequired, proc_transcript_valid
from .syntax import Cursor


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("MOLLY_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MOLLY_SEED must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror}") from None


def _role(path: str) -> RoleFile:
    return parse_role(_read(path), Path(path).stem)


def _is_role_text(text: str) -> bool:
    c = Cursor.of(text)
    return c.at("(") or c.at("eof")


def parse_env(text: str) -> ExecEnv:
    """Lines `param <value>` and `read <value>`, in index order."""
    c = Cursor.of(text)
    env = ExecEnv()
    while not c.at("eof"):
        kw = c.expect("ident", what="'param' or 'read'")
        if kw.text == "param":
            env.params.append(parse_value_at(c))
        elif kw.text == "read":
            env.inbound.append(parse_value_at(c))
        else:
            raise ParseError(f"unexpected {kw.text!r}", kw.line, kw.col, "'param' or 'read'")
    return env


def cmd_compile(args) -> int:
    p = compile_role(_role(args.role))
    text = print_proc(p)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    report = executability(_role(args.role))
    if report.verdict is Verdict.Executable:
        print("Executable")
        return 0
    for r in report.reasons:
        print(str(r))
    return 1


def cmd_run(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    text = _read(args.input)
    if _is_role_text(text):
        rl = parse_role(text)
        p = compile_role(rl)
        env = honest_env(rl, Mode(args.mode), seed, tags=args.tags, proc=p)
    else:
        p = parse_proc(text)
        if not args.env:
            raise UsageError("running a proc needs --env with its parameters and inbound values")
        env = parse_env(_read(args.env))
        env.tags = TagSource.counter() if args.tags == "counter" else TagSource.seeded(seed)
    try:
        store, tr = exec_proc(p, env)
    except ExecFailure as f:
        print(f"halted at statement {f.stmt_index}: {f.reason.value}", file=sys.stderr)
        return 1
    if args.emit_transcript:
        _write(args.emit_transcript, print_transcript(tr))
    else:
        sys.stdout.write(print_transcript(tr))
    if args.emit_store:
        _write(args.emit_store, print_store(store))
    return 0


def cmd_verify(args) -> int:
    p = parse_proc(_read(args.proc))
    tr = parse_transcript(_read(args.transcript))
    store = parse_store(_read(args.store)) if args.store else None
    try:
        bad = proc_transcript_valid(p, tr, store)
    except WitnessRequired as e:
        raise UsageError(f"{e}; pass --store") from None
    for v in bad:
        print(v)
    print("valid" if not bad else "invalid")
    return 0 if not bad else 1


def cmd_reflect(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    rl = _role(args.role)
    c = reflect_campaign([list(rl)], range(seed, seed + args.runs), fuzz_per_role=args.runs, seed=seed)
    print(c.summary())
    for _, v in c.violations:
        print(v)
    return 1 if c.violations else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="molly", description="Compile protocol roles into straight-line procs and check their runs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("compile", help="compile a role file to a proc")
    p.add_argument("role")
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("check", help="report whether a role is executable")
    p.add_argument("role")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="execute a role (with an honest peer) or a proc (with --env)")
    p.add_argument("input")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="fresh")
    p.add_argument("--seed", type=int)
    p.add_argument("--tags", choices=["counter", "random"], default="counter")
    p.add_argument("--env", help="parameters and inbound values for a proc input")
    p.add_argument("--emit-transcript")
    p.add_argument("--emit-store")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="check a transcript against a proc")
    p.add_argument("proc")
    p.add_argument("transcript")
    p.add_argument("--store")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("reflect", help="run honest and fuzzed executions and check every transcript")
    p.add_argument("role")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_reflect)
    return ap


def cli_main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CompileError as e:
        print(str(e), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
