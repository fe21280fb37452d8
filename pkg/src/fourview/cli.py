"""Command-line entry point: ``fourview check|render|map|doc|simulate|fmt``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional, Sequence

from . import docgen, loadsim, mapper, render
from .checker import CheckOptions, check, count
from .model import RULES, ArchitectureModel, Diagnostic, FourViewError
from .parser import ParseError, format_model, parse

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2

_COLORS = {"error": "\033[31m", "warning": "\033[33m", "info": "\033[36m"}


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


def _color(stream) -> bool:
    return (not os.environ.get("FOURVIEW_NO_COLOR")
            and hasattr(stream, "isatty") and stream.isatty())


def _emit_diag(d: Diagnostic, path: str, out) -> None:
    line = d.format(path)
    if _color(out):
        c = _COLORS[d.severity]
        line = line.replace(f" {d.severity} ", f" {c}{d.severity}\033[0m ", 1)
    print(line, file=out)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Usage(f"cannot write {path}: {exc.strerror}") from None


def _load(path: str, err) -> Optional[ArchitectureModel]:
    try:
        return parse(_read(path), path)
    except ParseError as exc:
        for d in exc.diagnostics:
            _emit_diag(d, path, err)
        return None


def _options(args) -> CheckOptions:
    disabled = set()
    for chunk in args.disable or ():
        disabled.update(r.strip() for r in chunk.split(",") if r.strip())
    unknown = sorted(disabled - set(RULES))
    if unknown:
        raise _Usage(f"unknown rule id(s): {', '.join(unknown)}")
    return CheckOptions(mode=args.mode, warnings_as_errors=getattr(args, "W", False),
                        disabled_rules=frozenset(disabled))


def _cmd_check(args, out, err) -> int:
    options = _options(args)
    status = EXIT_OK
    collected = []
    for path in args.files:
        try:
            model = parse(_read(path), path)
            diags = check(model, options)
        except ParseError as exc:
            diags = exc.diagnostics
        collected.append((path, diags))
        if any(d.severity == "error" for d in diags):
            status = EXIT_ERRORS
    if args.format == "json":
        print(json.dumps([d.to_dict() for _, ds in collected for d in ds], indent=2), file=out)
    else:
        for path, diags in collected:
            for d in diags:
                _emit_diag(d, path, out)
        totals = count(d for _, ds in collected for d in ds)
        print(f"{totals['error']} errors, {totals['warning']} warnings", file=out)
    return status


def _cmd_render(args, out, err) -> int:
    model = _load(args.file, err)
    if model is None:
        return EXIT_ERRORS
    try:
        text = render.to_dot(model, args.view, args.scenario)
    except FourViewError as exc:
        print(f"{args.file}: error {exc.code}: {exc.message}", file=err)
        return EXIT_ERRORS
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    _write(args.output, text, out)
    return EXIT_OK


def _parse_stimuli(spec: Optional[str]) -> tuple[tuple[str, str], ...]:
    out = []
    for item in (spec or "").split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, target = item.partition("=")
        if not sep or not name or not target:
            raise _Usage(f"bad stimulus {item!r}; expected name=class")
        out.append((name.strip(), target.strip()))
    return tuple(out)


def _cmd_map(args, out, err) -> int:
    model = _load(args.file, err)
    if model is None:
        return EXIT_ERRORS
    if model.logical is None:
        print(f"{args.file}: error E_NOVIEW: mapping needs a logical view", file=err)
        return EXIT_ERRORS
    groups = tuple(frozenset(g.split(",")) for g in args.group or ())
    constraints = mapper.MapperConstraints(args.max_processes, groups,
                                           _parse_stimuli(args.stimuli))
    strategy = mapper.inside_out if args.strategy == "inside-out" else mapper.outside_in
    try:
        result = strategy(model.logical, constraints)
    except FourViewError as exc:
        print(f"{args.file}: error {exc.code}: {exc.message}", file=err)
        return EXIT_ERRORS
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    log_stream = out if args.output not in (None, "-") else err
    for line in result.log_lines():
        print(line, file=log_stream)
    # configurations place the old processes; keep nodes and links only
    physical = model.physical
    if physical is not None:
        physical = dataclasses.replace(physical, configurations=())
    mapped = dataclasses.replace(model, process=result.process_view, l2p=result.l2p,
                                 physical=physical)
    text = format_model(mapped)
    reparsed = parse(text, args.output or "<mapped>")
    diags = check(reparsed, _options(args))
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        for d in errors:
            _emit_diag(d, args.output or "<mapped>", err)
        print("mapped model fails its own checks; nothing written", file=err)
        return EXIT_ERRORS
    _write(args.output, text, out)
    return EXIT_OK


def _estimate(model, config, args, err) -> Optional[loadsim.LoadReport]:
    try:
        return loadsim.estimate(model, config, CheckOptions(mode=args.mode))
    except FourViewError as exc:
        print(f"{args.file}: error {exc.code}: {exc.message}", file=err)
        return None


def _cmd_doc(args, out, err) -> int:
    model = _load(args.file, err)
    if model is None:
        return EXIT_ERRORS
    diags = check(model, CheckOptions(mode=args.mode))
    report = None
    if args.config:
        report = _estimate(model, args.config, args, err)
        if report is None:
            return EXIT_ERRORS
    _write(args.output, docgen.generate(model, report, diags), out)
    return EXIT_ERRORS if any(d.severity == "error" for d in diags) else EXIT_OK


def _cmd_simulate(args, out, err) -> int:
    model = _load(args.file, err)
    if model is None:
        return EXIT_ERRORS
    report = _estimate(model, args.config, args, err)
    if report is None:
        return EXIT_ERRORS
    for d in report.diagnostics:
        _emit_diag(d, args.file, err)
    out.write(report.to_json() if args.format == "json" else report.to_table())
    return EXIT_OK


def _cmd_fmt(args, out, err) -> int:
    model = _load(args.file, err)
    if model is None:
        return EXIT_ERRORS
    text = format_model(model)
    if args.write:
        _write(args.file, text, out)
    else:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fourview", description="4+1 architecture description toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mode(sp):
        sp.add_argument("--mode", choices=("strict", "sketch"), default="strict")

    c = sub.add_parser("check", help="check one or more .arch files")
    c.add_argument("files", nargs="+", metavar="file")
    mode(c)
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("-W", action="store_true", help="treat warnings as errors")
    c.add_argument("--disable", action="append", metavar="RULE,...")
    c.set_defaults(func=_cmd_check)

    r = sub.add_parser("render", help="emit a DOT blueprint for one view")
    r.add_argument("file")
    r.add_argument("--view", required=True,
                   choices=("logical", "process", "development", "physical", "scenario"))
    r.add_argument("--scenario")
    r.add_argument("-o", "--output")
    r.set_defaults(func=_cmd_render)

    m = sub.add_parser("map", help="synthesize a process view from the logical view")
    m.add_argument("file")
    m.add_argument("--strategy", choices=("inside-out", "outside-in"), required=True)
    m.add_argument("--max-processes", type=int, required=True)
    m.add_argument("--stimuli", metavar="name=class,...")
    m.add_argument("--group", action="append", metavar="class,class,...",
                   help="classes that must serialize on one agent (repeatable)")
    mode(m)
    m.add_argument("--disable", action="append", metavar="RULE,...")
    m.add_argument("-o", "--output")
    m.set_defaults(func=_cmd_map)

    d = sub.add_parser("doc", help="generate the architecture document")
    d.add_argument("file")
    d.add_argument("--config")
    mode(d)
    d.add_argument("-o", "--output")
    d.set_defaults(func=_cmd_doc)

    s = sub.add_parser("simulate", help="estimate loads for a configuration")
    s.add_argument("file")
    s.add_argument("--config", required=True)
    s.add_argument("--format", choices=("json", "table"), default="table")
    mode(s)
    s.set_defaults(func=_cmd_simulate)

    f = sub.add_parser("fmt", help="print or rewrite the canonical form")
    f.add_argument("file")
    f.add_argument("--write", action="store_true")
    f.set_defaults(func=_cmd_fmt)
    return p


def run(argv: Sequence[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(list(argv))
        if getattr(args, "max_processes", 1) < 1:
            raise _Usage("--max-processes must be >= 1")
        return args.func(args, out, err)
    except _Usage as exc:
        print(str(exc), file=err)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
