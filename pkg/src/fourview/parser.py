"""Textual ``.arch`` format: tokenizer, recursive-descent parser, formatter.

The grammar is block structured, one ``architecture`` per file::

    architecture pabx {
      rationale "..."
      logical {
        category telephony "Telephony" {
          class controller "Controller" {
            operations: detect, emit_tone
            autonomy: active
          }
        }
        relations { association controller -> terminal }
      }
      process {
        process ctl "Controller" replicas 1 {
          task main "Main" major
          task scan "Scan" minor period 200
        }
        connectors { shared_memory scan -> main }
      }
      development {
        layer 1 "Infrastructure" "hardware abstraction"
        subsystem io "I/O" layer 1 ksloc 8 { module drivers, buffers }
        depends app -> io
      }
      physical {
        node c1 "C computer" capacity 500
        link lan1 lan c1, f1 bandwidth 1000
        config small { place ctl on c1 }
      }
      scenarios {
        scenario off_hook "Off-hook" freq 2.0 {
          step 1: controller -> terminal.wake_up via message
        }
      }
      map l2p { class controller -> tasks main, scan }
      map l2d { class controller -> io.drivers }
    }

``#`` starts a comment that runs to end of line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional

from .model import (
    AUTONOMY,
    CONNECTOR_KINDS,
    IDENT_RE,
    MEDIA,
    PERSISTENCE,
    RELATION_KINDS,
    TASK_KINDS,
    ArchitectureModel,
    Class,
    ClassCategory,
    Configuration,
    Connector,
    DevDependency,
    DevelopmentView,
    Diagnostic,
    L2DEntry,
    L2PEntry,
    LayerDef,
    Link,
    LogicalView,
    Node,
    PhysicalView,
    Placement,
    Process,
    ProcessView,
    Relation,
    Scenario,
    ScenarioView,
    SourceSpan,
    Step,
    Subsystem,
    Task,
    find_duplicates,
    sort_diagnostics,
)

__all__ = ["ParseError", "SourceSpan", "parse", "parse_file", "format_model"]


class ParseError(Exception):
    """Raised when a document cannot be turned into a model."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sort_diagnostics(diagnostics)
        first = self.diagnostics[0]
        super().__init__(first.format())


class _Abort(Exception):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*(?:-(?!>)[A-Za-z0-9_]+)*)
  | (?P<arrow>->)
  | (?P<punct>[{}:,.])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # word, number, string, punct, eof
    text: str
    span: SourceSpan


def _tokenize(text: str, filename: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, col = 0, 1, 1
    last_end = SourceSpan(filename, 1, 1)
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(filename, line, col)
        if m is None:
            ch = text[pos]
            if ch == '"':
                msg = "unterminated string literal"
            else:
                msg = f"unexpected character {ch!r}"
            raise ParseError([Diagnostic("error", "E_PARSE", msg, span)])
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "arrow":
                kind = "punct"
            toks.append(_Tok(kind, chunk, span))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        if kind not in ("ws", "comment"):
            last_end = SourceSpan(filename, line, max(1, col - 1))
        pos = m.end()
    toks.append(_Tok("eof", "", last_end))
    return toks


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.toks = _tokenize(text, filename)
        self.i = 0
        self.diags: list[Diagnostic] = []

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _describe(self, tok: _Tok) -> str:
        return "end of input" if tok.kind == "eof" else repr(tok.text)

    def fail(self, expected: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        self.diags.append(Diagnostic("error", "E_PARSE",
                                     f"expected {expected}, found {self._describe(tok)}",
                                     tok.span))
        raise _Abort

    def at(self, text: str) -> bool:
        return self.tok.kind in ("word", "punct") and self.tok.text == text

    def accept(self, text: str) -> Optional[_Tok]:
        if self.at(text):
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, text: str) -> _Tok:
        tok = self.accept(text)
        if tok is None:
            self.fail(f"'{text}'")
        return tok

    def word(self, what: str = "a word") -> _Tok:
        tok = self.tok
        if tok.kind != "word":
            self.fail(what)
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> str:
        tok = self.word(what)
        if not IDENT_RE.match(tok.text):
            self.diags.append(Diagnostic(
                "error", "E_PARSE",
                f"invalid {what} '{tok.text}' (expected [a-z][a-z0-9_]*)", tok.span))
            raise _Abort
        return tok.text

    def ident_list(self, what: str) -> list[str]:
        items = [self.ident(what)]
        while self.accept(","):
            items.append(self.ident(what))
        return items

    def string(self) -> str:
        tok = self.tok
        if tok.kind != "string":
            self.fail("a quoted string")
        self.i += 1
        try:
            return json.loads(tok.text)
        except ValueError:
            self.diags.append(Diagnostic("error", "E_PARSE", "invalid string escape", tok.span))
            raise _Abort

    def opt_string(self) -> str:
        return self.string() if self.tok.kind == "string" else ""

    def number(self, what: str = "a number") -> float:
        tok = self.tok
        if tok.kind != "number":
            self.fail(what)
        self.i += 1
        return float(tok.text)

    def integer(self, what: str = "an integer") -> int:
        tok = self.tok
        if tok.kind != "number" or not tok.text.isdigit():
            self.fail(what)
        self.i += 1
        return int(tok.text)

    def enum(self, what: str, allowed, default: str) -> str:
        tok = self.word(f"a {what}")
        if tok.text not in allowed:
            self.diags.append(Diagnostic(
                "error", "E_ENUM",
                f"unknown {what} '{tok.text}' (expected one of {', '.join(allowed)})",
                tok.span))
            return default
        return tok.text

    def boolean(self, what: str) -> bool:
        return self.enum(what, ("true", "false"), "false") == "true"

    def block(self, item) -> None:
        self.expect("{")
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.fail("'}'")
            item()

    # -- grammar ------------------------------------------------------------

    def parse(self) -> ArchitectureModel:
        if not self.at("architecture"):
            self.fail("'architecture' block")
        head = self.expect("architecture")
        name = self.ident("architecture name")
        state: dict = {"rationale": "", "l2p": [], "l2d": []}

        def item():
            tok = self.tok
            if self.accept("rationale"):
                state["rationale"] = self.string()
            elif tok.text in ("logical", "process", "development", "physical", "scenarios") \
                    and tok.kind == "word":
                self.i += 1
                if tok.text in state:
                    self.diags.append(Diagnostic("error", "E_DUP",
                                                 f"duplicate {tok.text} view", tok.span))
                    raise _Abort
                state[tok.text] = getattr(self, f"_{tok.text}")()
            elif self.accept("map"):
                kind = self.word("'l2p' or 'l2d'")
                if kind.text == "l2p":
                    self.block(lambda: state["l2p"].append(self._l2p_entry()))
                elif kind.text == "l2d":
                    self.block(lambda: state["l2d"].append(self._l2d_entry()))
                else:
                    self.fail("'l2p' or 'l2d'", kind)
            else:
                self.fail("a view block, 'map' or 'rationale'")

        self.block(item)
        if self.tok.kind != "eof":
            self.fail("end of input")
        return ArchitectureModel(
            name=name, rationale=state["rationale"],
            logical=state.get("logical"), process=state.get("process"),
            development=state.get("development"), physical=state.get("physical"),
            scenarios=state.get("scenarios"),
            l2p=tuple(state["l2p"]), l2d=tuple(state["l2d"]), span=head.span)

    def _logical(self) -> LogicalView:
        cats: list[ClassCategory] = []
        classes: list[Class] = []
        relations: list[Relation] = []
        rationale = ""

        def item():
            nonlocal rationale
            if self.accept("rationale"):
                rationale = self.string()
            elif self.at("category"):
                span = self.expect("category").span
                cid = self.ident("category id")
                name = self.opt_string()
                members: list[Class] = []
                self.block(lambda: members.append(self._class(cid)))
                classes.extend(members)
                cats.append(ClassCategory(cid, name, tuple(c.id for c in members), span=span))
            elif self.at("class"):
                classes.append(self._class(None))
            elif self.accept("relations"):
                self.block(lambda: relations.append(self._relation()))
            else:
                self.fail("'category', 'class', 'relations' or 'rationale'")

        self.block(item)
        return LogicalView(tuple(cats), tuple(classes), tuple(relations), rationale)

    def _class(self, category: Optional[str]) -> Class:
        span = self.expect("class").span
        cid = self.ident("class id")
        name = self.opt_string()
        attrs: dict = {}

        def attr():
            key = self.word("a class attribute")
            self.expect(":")
            k = key.text
            if k in attrs:
                self.diags.append(Diagnostic("error", "E_DUP",
                                             f"attribute '{k}' given twice", key.span))
            if k == "operations":
                attrs[k] = tuple(self.ident_list("operation name"))
            elif k == "autonomy":
                attrs[k] = self.enum("autonomy", AUTONOMY, "passive")
            elif k == "persistence":
                attrs[k] = self.enum("persistence", PERSISTENCE, "transient")
            elif k == "subordinate_to":
                attrs[k] = self.ident("class id")
            elif k in ("distributed", "utility"):
                attrs[k] = self.boolean(k)
            elif k == "cost":
                attrs["est_cost"] = self.number()
            elif k == "category" and category is None:
                attrs[k] = self.ident("category id")
            else:
                self.fail("a class attribute", key)

        self.block(attr)
        if category is not None:
            attrs["category"] = category
        return Class(cid, name, span=span, **attrs)

    def _relation(self) -> Relation:
        span = self.tok.span
        kind = self.enum("relation kind", RELATION_KINDS, "association")
        src = self.ident("class id")
        self.expect("->")
        return Relation(kind, src, self.ident("class id"), span=span)

    def _process(self) -> ProcessView:
        procs: list[Process] = []
        conns: list[Connector] = []
        rationale = ""

        def item():
            nonlocal rationale
            if self.accept("rationale"):
                rationale = self.string()
            elif self.at("process"):
                span = self.expect("process").span
                pid = self.ident("process id")
                name = self.opt_string()
                replicas = self.integer() if self.accept("replicas") else 1
                tasks: list[Task] = []
                self.block(lambda: tasks.append(self._task()))
                procs.append(Process(pid, name, tuple(tasks), replicas, span=span))
            elif self.accept("connectors"):
                self.block(lambda: conns.append(self._connector()))
            else:
                self.fail("'process', 'connectors' or 'rationale'")

        self.block(item)
        return ProcessView(tuple(procs), tuple(conns), rationale)

    def _task(self) -> Task:
        span = self.expect("task").span
        tid = self.ident("task id")
        name = self.opt_string()
        kind = self.enum("task kind", TASK_KINDS, "major")
        period = self.number() if self.accept("period") else None
        return Task(tid, name, kind, period, span=span)

    def _connector(self) -> Connector:
        span = self.tok.span
        kind = self.enum("connector kind", CONNECTOR_KINDS, "message")
        src = self.ident("task id")
        self.expect("->")
        return Connector(kind, src, self.ident("task id"), span=span)

    def _development(self) -> DevelopmentView:
        layers: list[LayerDef] = []
        subs: list[Subsystem] = []
        deps: list[DevDependency] = []
        rationale = ""

        def item():
            nonlocal rationale
            if self.accept("rationale"):
                rationale = self.string()
            elif self.at("layer"):
                span = self.expect("layer").span
                number = self.integer("a layer number")
                name = self.opt_string()
                resp = self.opt_string()
                layers.append(LayerDef(number, name, resp, span=span))
            elif self.at("subsystem"):
                span = self.expect("subsystem").span
                sid = self.ident("subsystem id")
                name = self.opt_string()
                self.expect("layer")
                layer = self.integer("a layer number")
                ksloc = self.number() if self.accept("ksloc") else None
                modules: list[str] = []

                def mod():
                    self.expect("module")
                    modules.extend(self.ident_list("module name"))

                self.block(mod)
                subs.append(Subsystem(sid, name, layer, tuple(modules), ksloc, span=span))
            elif self.at("depends"):
                span = self.expect("depends").span
                src = self.ident("subsystem id")
                self.expect("->")
                deps.append(DevDependency(src, self.ident("subsystem id"), span=span))
            else:
                self.fail("'layer', 'subsystem', 'depends' or 'rationale'")

        self.block(item)
        return DevelopmentView(tuple(layers), tuple(subs), tuple(deps), rationale)

    def _physical(self) -> PhysicalView:
        nodes: list[Node] = []
        links: list[Link] = []
        configs: list[Configuration] = []
        rationale = ""

        def item():
            nonlocal rationale
            if self.accept("rationale"):
                rationale = self.string()
            elif self.at("node"):
                span = self.expect("node").span
                nid = self.ident("node id")
                name = self.opt_string()
                cap = self.number() if self.accept("capacity") else None
                nodes.append(Node(nid, name, cap, span=span))
            elif self.at("link"):
                span = self.expect("link").span
                lid = self.ident("link id")
                medium = self.enum("link medium", MEDIA, "other")
                ends = [self.ident("node id")]
                self.expect(",")
                ends += self.ident_list("node id")
                bw = self.number() if self.accept("bandwidth") else None
                links.append(Link(lid, medium, tuple(ends), bw, span=span))
            elif self.at("config"):
                span = self.expect("config").span
                name = self.ident("configuration name")
                places: list[Placement] = []

                def place():
                    pspan = self.expect("place").span
                    proc = self.ident("process id")
                    self.expect("on")
                    places.append(Placement(proc, tuple(self.ident_list("node id")), span=pspan))

                self.block(place)
                configs.append(Configuration(name, tuple(places), span=span))
            else:
                self.fail("'node', 'link', 'config' or 'rationale'")

        self.block(item)
        return PhysicalView(tuple(nodes), tuple(links), tuple(configs), rationale)

    def _scenarios(self) -> ScenarioView:
        scenarios: list[Scenario] = []
        rationale = ""

        def item():
            nonlocal rationale
            if self.accept("rationale"):
                rationale = self.string()
                return
            span = self.expect("scenario").span
            sid = self.ident("scenario id")
            name = self.opt_string()
            freq = self.number() if self.accept("freq") else None
            steps: list[Step] = []
            self.block(lambda: steps.append(self._step()))
            scenarios.append(Scenario(sid, name, freq, tuple(steps), span=span))

        self.block(item)
        return ScenarioView(tuple(scenarios), rationale)

    def _step(self) -> Step:
        span = self.expect("step").span
        seq = self.integer("a step number")
        self.expect(":")
        src = self.ident("class id")
        self.expect("->")
        dst = self.ident("class id")
        self.expect(".")
        op = self.ident("operation name")
        hint = None
        if self.accept("via"):
            hint = self.enum("connector kind", CONNECTOR_KINDS, "message")
        return Step(seq, src, dst, op, hint, span=span)

    def _l2p_entry(self) -> L2PEntry:
        span = self.expect("class").span
        cls = self.ident("class id")
        self.expect("->")
        self.expect("tasks")
        return L2PEntry(cls, tuple(self.ident_list("task id")), span=span)

    def _l2d_entry(self) -> L2DEntry:
        span = self.expect("class").span
        cls = self.ident("class id")
        self.expect("->")
        mods = []
        while True:
            sub = self.ident("subsystem id")
            self.expect(".")
            mods.append((sub, self.ident("module name")))
            if not self.accept(","):
                break
        return L2DEntry(cls, tuple(mods), span=span)


def parse(text: str, filename: str = "<input>") -> ArchitectureModel:
    """Parse an ``.arch`` document. Raises :class:`ParseError` on failure."""
    p = _Parser(text.replace("\r\n", "\n"), filename)
    try:
        model = p.parse()
    except _Abort:
        raise ParseError(p.diags) from None
    if p.diags:
        raise ParseError(p.diags)
    dups = find_duplicates(model)
    if dups:
        raise ParseError(dups)
    return model


def parse_file(path) -> ArchitectureModel:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read(), str(path))


# -- formatting -------------------------------------------------------------


def _q(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _num(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _named(ident: str, name: str) -> str:
    return ident if name == ident else f"{ident} {_q(name)}"


class _Writer:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def __call__(self, line: str) -> None:
        self.lines.append("  " * self.depth + line)

    def open(self, head: str) -> None:
        self(head + " {")
        self.depth += 1

    def close(self) -> None:
        self.depth -= 1
        self("}")


def _format_class(w: _Writer, c: Class, with_category: bool) -> None:
    w.open(f"class {_named(c.id, c.name)}")
    if with_category and c.category is not None:
        w(f"category: {c.category}")
    if c.operations:
        w(f"operations: {', '.join(c.operations)}")
    if c.autonomy != "passive":
        w(f"autonomy: {c.autonomy}")
    if c.persistence != "transient":
        w(f"persistence: {c.persistence}")
    if c.subordinate_to is not None:
        w(f"subordinate_to: {c.subordinate_to}")
    if c.distributed:
        w("distributed: true")
    if c.utility:
        w("utility: true")
    if c.est_cost != 1.0:
        w(f"cost: {_num(c.est_cost)}")
    w.close()


def format_model(model: ArchitectureModel) -> str:
    """Canonical text for ``model``; sections in fixed order, 2-space indent, LF."""
    w = _Writer()
    w.open(f"architecture {model.name}")
    if model.rationale:
        w(f"rationale {_q(model.rationale)}")

    lv = model.logical
    if lv is not None:
        w.open("logical")
        if lv.rationale:
            w(f"rationale {_q(lv.rationale)}")
        nested = set()
        for cat in lv.categories:
            w.open(f"category {_named(cat.id, cat.name)}")
            for c in lv.classes:
                if c.category == cat.id and c.id in cat.classes and c.id not in nested:
                    _format_class(w, c, with_category=False)
                    nested.add(c.id)
            w.close()
        for c in lv.classes:
            if c.id not in nested:
                _format_class(w, c, with_category=True)
        if lv.relations:
            w.open("relations")
            for r in lv.relations:
                w(f"{r.kind} {r.source} -> {r.target}")
            w.close()
        w.close()

    pv = model.process
    if pv is not None:
        w.open("process")
        if pv.rationale:
            w(f"rationale {_q(pv.rationale)}")
        for p in pv.processes:
            head = f"process {_named(p.id, p.name)}"
            if p.replicas != 1:
                head += f" replicas {p.replicas}"
            w.open(head)
            for t in p.tasks:
                line = f"task {_named(t.id, t.name)} {t.kind}"
                if t.period_ms is not None:
                    line += f" period {_num(t.period_ms)}"
                w(line)
            w.close()
        if pv.connectors:
            w.open("connectors")
            for c in pv.connectors:
                w(f"{c.kind} {c.source} -> {c.target}")
            w.close()
        w.close()

    dv = model.development
    if dv is not None:
        w.open("development")
        if dv.rationale:
            w(f"rationale {_q(dv.rationale)}")
        for layer in dv.layers:
            line = f"layer {layer.number} {_q(layer.name)}"
            if layer.responsibility:
                line += f" {_q(layer.responsibility)}"
            w(line)
        for s in dv.subsystems:
            head = f"subsystem {_named(s.id, s.name)} layer {s.layer}"
            if s.ksloc is not None:
                head += f" ksloc {_num(s.ksloc)}"
            if s.modules:
                w(f"{head} {{ module {', '.join(s.modules)} }}")
            else:
                w(f"{head} {{ }}")
        for d in dv.dependencies:
            w(f"depends {d.source} -> {d.target}")
        w.close()

    ph = model.physical
    if ph is not None:
        w.open("physical")
        if ph.rationale:
            w(f"rationale {_q(ph.rationale)}")
        for n in ph.nodes:
            line = f"node {_named(n.id, n.name)}"
            if n.capacity is not None:
                line += f" capacity {_num(n.capacity)}"
            w(line)
        for l in ph.links:
            line = f"link {l.id} {l.medium} {', '.join(l.endpoints)}"
            if l.bandwidth is not None:
                line += f" bandwidth {_num(l.bandwidth)}"
            w(line)
        for cfg in ph.configurations:
            w.open(f"config {cfg.name}")
            for pl in cfg.placement:
                w(f"place {pl.process} on {', '.join(pl.nodes)}")
            w.close()
        w.close()

    sv = model.scenarios
    if sv is not None:
        w.open("scenarios")
        if sv.rationale:
            w(f"rationale {_q(sv.rationale)}")
        for s in sv.scenarios:
            head = f"scenario {_named(s.id, s.name)}"
            if s.frequency_hz is not None:
                head += f" freq {_num(s.frequency_hz)}"
            w.open(head)
            for st in s.steps:
                line = f"step {st.seq}: {st.source} -> {st.target}.{st.operation}"
                if st.connector_hint is not None:
                    line += f" via {st.connector_hint}"
                w(line)
            w.close()
        w.close()

    if model.l2p:
        w.open("map l2p")
        for e in model.l2p:
            w(f"class {e.cls} -> tasks {', '.join(e.tasks)}")
        w.close()
    if model.l2d:
        w.open("map l2d")
        for e in model.l2d:
            w(f"class {e.cls} -> {', '.join(f'{s}.{m}' for s, m in e.modules)}")
        w.close()
    w.close()
    return "\n".join(w.lines) + "\n"
