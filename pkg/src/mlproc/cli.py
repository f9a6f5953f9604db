"""``mlproc`` command line.

Exit codes: 0 success, 1 model or trace errors, 2 I/O or usage errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, TextIO

from . import enactment as en
from .bpmn import ExportOptions, export_bpmn
from .diagnostics import MlprocError, has_errors
from .docgen import generate_html
from .semantics import compile_source
from .syntax import parse, print_canonical

EXIT_OK, EXIT_MODEL, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    """I/O or usage failure; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _Usage(f"{self.prog}: {message}")


def write_atomic(path: Path, data: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as err:
        raise _Usage(f"cannot write {path}: {err.strerror}") from err
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as err:
        Path(tmp).unlink(missing_ok=True)
        raise _Usage(f"cannot write {path}: {err.strerror}") from err


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise _Usage(f"cannot read {path}: {getattr(err, 'strerror', None) or err}") from err


def _report(diagnostics: Iterable, filename: str, out: TextIO) -> None:
    for d in diagnostics:
        print(d.render(filename), file=out)


def _compile(path: str, out: TextIO):
    """Compiled model, or None after printing diagnostics when it has errors."""
    result = compile_source(_read(path))
    _report(result.diagnostics, path, out)
    return result.model if result.ok else None


def cmd_check(args) -> int:
    result = compile_source(_read(args.input))
    _report(result.diagnostics, args.input, sys.stdout)
    errors = sum(d.is_error for d in result.diagnostics)
    warnings = len(result.diagnostics) - errors
    print(f"{args.input}: {errors} error(s), {warnings} warning(s)")
    return EXIT_OK if result.ok else EXIT_MODEL


def cmd_fmt(args) -> int:
    result = parse(_read(args.input))
    if has_errors(result.diagnostics) or result.ast is None:
        _report(result.diagnostics, args.input, sys.stderr)
        return EXIT_MODEL
    text = print_canonical(result.ast)
    if args.output:
        write_atomic(Path(args.output), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_export_bpmn(args) -> int:
    model = _compile(args.input, sys.stderr)
    if model is None:
        return EXIT_MODEL
    options = ExportOptions(insert_gateways=not args.no_gateways)
    if args.namespace:
        options = replace(options, target_namespace=args.namespace)
    xml = export_bpmn(model, options)
    output = Path(args.output) if args.output else Path(args.input).with_suffix(".bpmn")
    write_atomic(output, xml)
    return EXIT_OK


def cmd_export_html(args) -> int:
    model = _compile(args.input, sys.stderr)
    if model is None:
        return EXIT_MODEL
    pages = generate_html(model, single_file=not args.multi_file)
    if args.output:
        target = Path(args.output)
    else:
        target = Path(args.input).with_suffix("") if args.multi_file else Path("index.html")
    if args.multi_file:
        try:
            target.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise _Usage(f"cannot create {target}: {err.strerror}") from err
        for page in pages:
            write_atomic(target / page.relative_path, page.body)
    else:
        write_atomic(target, pages[0].body)
    return EXIT_OK


def _run_commands(instance: en.Instance, lines: Iterable[str], out: TextIO) -> bool:
    """Execute REPL commands; True when every command succeeded."""
    ok = True
    actions = {"start": en.start, "complete": en.complete, "skip": en.skip}
    for raw in lines:
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        name, rest = words[0], words[1:]
        if name == "quit":
            break
        if name == "status" and not rest:
            out.write(en.status(instance))
        elif name == "log" and not rest:
            out.write(en.format_log(instance.log))
        elif name in actions and len(rest) == 1:
            before = len(instance.log)
            try:
                actions[name](instance, rest[0])
            except MlprocError as err:
                print(f"error {err.code}: {err.message}", file=out)
                ok = False
                continue
            for event in instance.log[before:]:
                print(event.render(), file=out)
        else:
            print(f"unknown command: {raw.strip()!r} "
                  "(expected status, start <id>, complete <id>, skip <id>, log, quit)", file=out)
            ok = False
    return ok


def cmd_run(args) -> int:
    model = _compile(args.input, sys.stderr)
    if model is None:
        return EXIT_MODEL
    instance = en.create_instance(model)
    for event in instance.log:
        print(event.render())
    if args.script:
        lines = _read(args.script).splitlines()
    else:
        lines = _interactive(sys.stdin)
    ok = _run_commands(instance, lines, sys.stdout)
    log_path = Path(args.output) if args.output else Path(args.input + ".log")
    write_atomic(log_path, en.format_log(instance.log))
    # a script is a test harness, so its failed commands fail the run
    return EXIT_MODEL if args.script and not ok else EXIT_OK


def _interactive(stream: TextIO):
    prompt = stream.isatty()
    while True:
        if prompt:
            print("mlproc> ", end="", flush=True)
        line = stream.readline()
        if not line:
            return
        yield line


def cmd_replay(args) -> int:
    model = _compile(args.input, sys.stderr)
    if model is None:
        return EXIT_MODEL
    try:
        events = en.parse_log(_read(args.log))
        instance = en.replay(model, events)
    except MlprocError as err:
        print(f"{args.log}: error {err.code}: {err.message}", file=sys.stderr)
        return EXIT_MODEL
    sys.stdout.write(en.status(instance))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlproc", description="Model, check, export and enact "
                     "machine learning engineering processes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="report diagnostics")
    p.add_argument("input")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fmt", help="print the canonical form")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("export-bpmn", help="write BPMN 2.0 XML")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--no-gateways", action="store_true",
                   help="do not insert parallel gateways at fan-out/fan-in")
    p.add_argument("--namespace", help="targetNamespace of the definitions element")
    p.set_defaults(func=cmd_export_bpmn)

    p = sub.add_parser("export-html", help="write HTML documentation")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="file (single-file) or directory (multi-file)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--single-file", action="store_true", help="one page (default)")
    mode.add_argument("--multi-file", action="store_true", help="index plus one page per activity")
    p.set_defaults(func=cmd_export_html)

    p = sub.add_parser("run", help="enact the process interactively")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="event log path (default <input>.log)")
    p.add_argument("--script", help="read commands from a file instead of stdin")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="check an event log and print the final status")
    p.add_argument("log")
    p.add_argument("input")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _Usage as err:
        print(err, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exit_:
        # --help and friends
        return exit_.code if isinstance(exit_.code, int) else EXIT_USAGE
    except MlprocError as err:
        print(f"error {err.code}: {err.message}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
