"""Domain model for a 4+1 architecture description.

All model values are frozen dataclasses. Keyed collections are sorted at
construction time, so two models that differ only in declaration order
compare equal and format identically. Source spans are carried on every
declaration but excluded from equality.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import networkx as nx

IDENT_RE = re.compile(r"[a-z][a-z0-9_]*\Z")

AUTONOMY = ("active", "passive", "protected")
PERSISTENCE = ("transient", "permanent")
RELATION_KINDS = ("association", "inheritance", "containment", "usage")
TASK_KINDS = ("major", "minor")
CONNECTOR_KINDS = ("message", "rpc", "broadcast", "rendezvous", "shared_memory")
INTER_PROCESS_KINDS = ("message", "rpc", "broadcast")
LOCAL_KINDS = ("rendezvous", "shared_memory")
MEDIA = ("lan", "wan", "bus", "other")
SEVERITIES = ("error", "warning", "info")
VIEWS = ("logical", "process", "development", "physical", "scenarios")

RULES = {
    "E_PARSE": "syntax error",
    "E_ENUM": "unknown enumeration value",
    "E_DUP": "duplicate identifier",
    "E_REF": "unresolved reference",
    "E_INVALID": "structural invariant violated",
    "E_NOSCENARIO": "unknown scenario",
    "E_NOVIEW": "requested view is absent",
    "E_NOCONFIG": "unknown physical configuration",
    "E_UNCHECKED": "model has outstanding errors",
    "E_NOSTIMULI": "outside-in mapping needs stimuli",
    "E_INFEASIBLE": "mapping constraints cannot be met",
    "L001": "class category membership",
    "D001": "dependency into a higher layer",
    "D002": "layer count outside 4..6",
    "D003": "subsystem size outside 5..20 KSLOC",
    "D004": "dependency cycle within a layer",
    "P001": "local connector crosses a process boundary",
    "P002": "major task relies only on local connectors",
    "M001": "class not mapped to any task",
    "M002": "subordinate class escapes its master's tasks",
    "M003": "active class has no agent task of its own",
    "M004": "class not mapped to any module",
    "PH01": "configuration placement incomplete or wrong arity",
    "S001": "scenario step references missing class or operation",
    "S002": "cross-process hop without inter-process connector",
    "T001": "view absent, dependent rules skipped",
}


class FourViewError(Exception):
    """Raised by operations that cannot proceed; ``code`` is a catalog id."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    rule: str
    message: str
    location: Optional[SourceSpan] = None

    def sort_key(self):
        loc = self.location
        if loc is None:
            return ("", 0, 0, self.rule, self.message)
        return (loc.file, loc.line, loc.column, self.rule, self.message)

    def format(self, default_file: str = "<input>") -> str:
        where = str(self.location) if self.location else default_file
        return f"{where}: {self.severity} {self.rule}: {self.message}"

    def to_dict(self) -> dict:
        loc = self.location
        return {
            "rule": self.rule,
            "severity": self.severity,
            "message": self.message,
            "file": loc.file if loc else None,
            "line": loc.line if loc else None,
            "column": loc.column if loc else None,
        }


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=Diagnostic.sort_key)


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False)


def _sorted(obj, name: str, key) -> None:
    object.__setattr__(obj, name, tuple(sorted(getattr(obj, name), key=key)))


def _tuple(obj, name: str) -> None:
    object.__setattr__(obj, name, tuple(getattr(obj, name)))


# -- logical view -----------------------------------------------------------


@dataclass(frozen=True)
class Class:
    id: str
    name: str = ""
    category: Optional[str] = None
    operations: tuple[str, ...] = ()
    autonomy: str = "passive"
    persistence: str = "transient"
    subordinate_to: Optional[str] = None
    distributed: bool = False
    utility: bool = False
    est_cost: float = 1.0
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _tuple(self, "operations")


@dataclass(frozen=True)
class ClassCategory:
    id: str
    name: str = ""
    classes: tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _sorted(self, "classes", key=lambda c: c)


@dataclass(frozen=True)
class Relation:
    kind: str
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LogicalView:
    categories: tuple[ClassCategory, ...] = ()
    classes: tuple[Class, ...] = ()
    relations: tuple[Relation, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        _sorted(self, "categories", key=lambda c: c.id)
        _sorted(self, "classes", key=lambda c: c.id)
        _sorted(self, "relations", key=lambda r: (r.source, r.target, r.kind))

    def class_map(self) -> dict[str, Class]:
        return {c.id: c for c in self.classes}


# -- process view -----------------------------------------------------------


@dataclass(frozen=True)
class Task:
    id: str
    name: str = ""
    kind: str = "major"
    period_ms: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class Process:
    id: str
    name: str = ""
    tasks: tuple[Task, ...] = ()
    replicas: int = 1
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _sorted(self, "tasks", key=lambda t: t.id)


@dataclass(frozen=True)
class Connector:
    kind: str
    source: str
    target: str
    span: Optional[SourceSpan] = _span()

    @property
    def label(self) -> str:
        return f"{self.source}->{self.target} ({self.kind})"


@dataclass(frozen=True)
class ProcessView:
    processes: tuple[Process, ...] = ()
    connectors: tuple[Connector, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        _sorted(self, "processes", key=lambda p: p.id)
        _sorted(self, "connectors",
                key=lambda c: (c.source, c.target, CONNECTOR_KINDS.index(c.kind)
                               if c.kind in CONNECTOR_KINDS else len(CONNECTOR_KINDS)))

    def tasks(self) -> Iterator[tuple[Process, Task]]:
        for p in self.processes:
            for t in p.tasks:
                yield p, t

    def process_of(self) -> dict[str, str]:
        """Task id -> owning process id."""
        return {t.id: p.id for p, t in self.tasks()}


# -- development view -------------------------------------------------------


@dataclass(frozen=True)
class LayerDef:
    number: int
    name: str = ""
    responsibility: str = ""
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", f"Layer {self.number}")


@dataclass(frozen=True)
class Subsystem:
    id: str
    name: str = ""
    layer: int = 1
    modules: tuple[str, ...] = ()
    ksloc: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _tuple(self, "modules")


@dataclass(frozen=True)
class DevDependency:
    source: str
    target: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class DevelopmentView:
    layers: tuple[LayerDef, ...] = ()
    subsystems: tuple[Subsystem, ...] = ()
    dependencies: tuple[DevDependency, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        _sorted(self, "layers", key=lambda l: l.number)
        _sorted(self, "subsystems", key=lambda s: s.id)
        _sorted(self, "dependencies", key=lambda d: (d.source, d.target))


# -- physical view ----------------------------------------------------------


@dataclass(frozen=True)
class Node:
    id: str
    name: str = ""
    capacity: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)


@dataclass(frozen=True)
class Link:
    id: str
    medium: str = "lan"
    endpoints: tuple[str, ...] = ()
    bandwidth: Optional[float] = None
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        _sorted(self, "endpoints", key=lambda n: n)


@dataclass(frozen=True)
class Placement:
    process: str
    nodes: tuple[str, ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        _tuple(self, "nodes")


@dataclass(frozen=True)
class Configuration:
    name: str
    placement: tuple[Placement, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        _sorted(self, "placement", key=lambda p: p.process)

    def nodes_for(self, process: str) -> tuple[str, ...]:
        for p in self.placement:
            if p.process == process:
                return p.nodes
        return ()


@dataclass(frozen=True)
class PhysicalView:
    nodes: tuple[Node, ...] = ()
    links: tuple[Link, ...] = ()
    configurations: tuple[Configuration, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        _sorted(self, "nodes", key=lambda n: n.id)
        _sorted(self, "links", key=lambda l: l.id)
        _sorted(self, "configurations", key=lambda c: c.name)

    def configuration(self, name: str) -> Optional[Configuration]:
        for c in self.configurations:
            if c.name == name:
                return c
        return None


# -- scenarios --------------------------------------------------------------


@dataclass(frozen=True)
class Step:
    seq: int
    source: str
    target: str
    operation: str
    connector_hint: Optional[str] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Scenario:
    id: str
    name: str = ""
    frequency_hz: Optional[float] = None
    steps: tuple[Step, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not self.name:
            object.__setattr__(self, "name", self.id)
        _sorted(self, "steps", key=lambda s: s.seq)


@dataclass(frozen=True)
class ScenarioView:
    scenarios: tuple[Scenario, ...] = ()
    rationale: str = ""

    def __post_init__(self):
        _sorted(self, "scenarios", key=lambda s: s.id)

    def get(self, scenario_id: str) -> Optional[Scenario]:
        for s in self.scenarios:
            if s.id == scenario_id:
                return s
        return None


# -- cross-view mappings ----------------------------------------------------


@dataclass(frozen=True)
class L2PEntry:
    cls: str
    tasks: tuple[str, ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        _tuple(self, "tasks")


@dataclass(frozen=True)
class L2DEntry:
    cls: str
    modules: tuple[tuple[str, str], ...]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(tuple(m) for m in self.modules))


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    rationale: str = ""
    logical: Optional[LogicalView] = None
    process: Optional[ProcessView] = None
    development: Optional[DevelopmentView] = None
    physical: Optional[PhysicalView] = None
    scenarios: Optional[ScenarioView] = None
    l2p: tuple[L2PEntry, ...] = ()
    l2d: tuple[L2DEntry, ...] = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        _sorted(self, "l2p", key=lambda e: e.cls)
        _sorted(self, "l2d", key=lambda e: e.cls)

    def l2p_map(self) -> dict[str, tuple[str, ...]]:
        return {e.cls: e.tasks for e in self.l2p}


def view_presence(model: ArchitectureModel) -> frozenset[str]:
    """Names of the views declared in ``model``."""
    return frozenset(v for v in VIEWS if getattr(model, v) is not None)


# -- resolution -------------------------------------------------------------


def _err(rule: str, message: str, span: Optional[SourceSpan]) -> Diagnostic:
    return Diagnostic("error", rule, message, span)


def _dups(kind: str, items, key, span) -> list[Diagnostic]:
    counts = Counter(key(i) for i in items)
    out = []
    seen = set()
    for item in items:
        k = key(item)
        if counts[k] > 1:
            if k in seen:
                out.append(_err("E_DUP", f"duplicate {kind} id '{k}'", span(item)))
            seen.add(k)
    return out


def find_duplicates(model: ArchitectureModel) -> list[Diagnostic]:
    """Duplicate-id diagnostics only; each repeat after the first is reported."""
    out: list[Diagnostic] = []
    sp = lambda x: x.span  # noqa: E731
    lv = model.logical
    if lv:
        out += _dups("category", lv.categories, lambda c: c.id, sp)
        out += _dups("class", lv.classes, lambda c: c.id, sp)
        for c in lv.classes:
            out += _dups(f"operation (class '{c.id}')", c.operations, lambda o: o,
                         lambda _o, c=c: c.span)
    pv = model.process
    if pv:
        out += _dups("process", pv.processes, lambda p: p.id, sp)
        out += _dups("task", [t for _, t in pv.tasks()], lambda t: t.id, sp)
    dv = model.development
    if dv:
        out += _dups("layer", dv.layers, lambda l: str(l.number), sp)
        out += _dups("subsystem", dv.subsystems, lambda s: s.id, sp)
        for s in dv.subsystems:
            out += _dups(f"module (subsystem '{s.id}')", s.modules, lambda m: m,
                         lambda _m, s=s: s.span)
    ph = model.physical
    if ph:
        out += _dups("node", ph.nodes, lambda n: n.id, sp)
        out += _dups("link", ph.links, lambda l: l.id, sp)
        out += _dups("configuration", ph.configurations, lambda c: c.name, sp)
        for cfg in ph.configurations:
            out += _dups(f"placement (config '{cfg.name}')", cfg.placement,
                         lambda p: p.process, sp)
    sv = model.scenarios
    if sv:
        out += _dups("scenario", sv.scenarios, lambda s: s.id, sp)
        for s in sv.scenarios:
            out += _dups(f"step (scenario '{s.id}')", s.steps, lambda st: str(st.seq), sp)
    out += _dups("l2p entry", model.l2p, lambda e: e.cls, sp)
    out += _dups("l2d entry", model.l2d, lambda e: e.cls, sp)
    return out


def _check_ident(kind: str, value: str, span, out: list) -> None:
    if not IDENT_RE.match(value):
        out.append(_err("E_INVALID", f"{kind} id '{value}' is not a valid identifier", span))


def _positive(what: str, value, span, out: list, allow_zero: bool = False) -> None:
    if value is None:
        return
    ok = value >= 0 if allow_zero else value > 0
    if not ok or value != value or value == float("inf"):
        bound = "nonnegative" if allow_zero else "positive"
        out.append(_err("E_INVALID", f"{what} must be a finite {bound} number", span))


def _enum(what: str, value: str, allowed, span, out: list) -> None:
    if value not in allowed:
        out.append(_err("E_INVALID", f"{what} '{value}' is not one of {', '.join(allowed)}", span))


def _resolve_logical(lv: LogicalView, out: list) -> None:
    cats = {c.id for c in lv.categories}
    classes = lv.class_map()
    for cat in lv.categories:
        _check_ident("category", cat.id, cat.span, out)
        for cid in cat.classes:
            if cid not in classes:
                out.append(_err("E_REF", f"category '{cat.id}' lists unresolved class '{cid}'",
                                cat.span))
    for c in lv.classes:
        _check_ident("class", c.id, c.span, out)
        _enum("autonomy", c.autonomy, AUTONOMY, c.span, out)
        _enum("persistence", c.persistence, PERSISTENCE, c.span, out)
        _positive(f"cost of class '{c.id}'", c.est_cost, c.span, out, allow_zero=True)
        if c.category is not None and c.category not in cats:
            out.append(_err("E_REF", f"unresolved category '{c.category}'", c.span))
        if c.subordinate_to is not None:
            if c.subordinate_to == c.id:
                out.append(_err("E_INVALID", f"class '{c.id}' is subordinate to itself", c.span))
            elif c.subordinate_to not in classes:
                out.append(_err("E_REF", f"unresolved class '{c.subordinate_to}'", c.span))
    # subordination chains must terminate
    for c in lv.classes:
        if c.subordinate_to == c.id:
            continue
        seen: set[str] = set()
        cur = c.subordinate_to
        while cur is not None and cur in classes and cur not in seen:
            if cur == c.id:
                out.append(_err("E_INVALID", f"subordination cycle through class '{c.id}'",
                                c.span))
                break
            seen.add(cur)
            cur = classes[cur].subordinate_to
    inherit = nx.DiGraph()
    for r in lv.relations:
        _enum("relation kind", r.kind, RELATION_KINDS, r.span, out)
        for end in (r.source, r.target):
            if end not in classes:
                out.append(_err("E_REF", f"unresolved class '{end}'", r.span))
        if r.kind == "inheritance":
            inherit.add_edge(r.source, r.target)
    if not nx.is_directed_acyclic_graph(inherit):
        cyc = nx.find_cycle(inherit)
        names = " -> ".join([a for a, _ in cyc] + [cyc[0][0]])
        out.append(_err("E_INVALID", f"inheritance cycle {names}", None))


def _resolve_process(pv: ProcessView, out: list) -> None:
    tasks = pv.process_of()
    for p in pv.processes:
        _check_ident("process", p.id, p.span, out)
        if not p.tasks:
            out.append(_err("E_INVALID", f"process '{p.id}' has no tasks", p.span))
        if not isinstance(p.replicas, int) or p.replicas < 1:
            out.append(_err("E_INVALID", f"process '{p.id}' replicas must be >= 1", p.span))
        for t in p.tasks:
            _check_ident("task", t.id, t.span, out)
            _enum("task kind", t.kind, TASK_KINDS, t.span, out)
            _positive(f"period of task '{t.id}'", t.period_ms, t.span, out)
    for c in pv.connectors:
        _enum("connector kind", c.kind, CONNECTOR_KINDS, c.span, out)
        for end in (c.source, c.target):
            if end not in tasks:
                out.append(_err("E_REF", f"unresolved task '{end}'", c.span))
        if c.source == c.target:
            out.append(_err("E_INVALID", f"connector joins task '{c.source}' to itself", c.span))


def _resolve_development(dv: DevelopmentView, out: list) -> None:
    numbers = [l.number for l in dv.layers]
    if sorted(set(numbers)) != list(range(1, len(set(numbers)) + 1)):
        out.append(_err("E_INVALID", "layer numbers must be consecutive starting at 1",
                        dv.layers[0].span if dv.layers else None))
    subs = {s.id for s in dv.subsystems}
    for s in dv.subsystems:
        _check_ident("subsystem", s.id, s.span, out)
        _positive(f"ksloc of subsystem '{s.id}'", s.ksloc, s.span, out)
        if s.layer not in numbers:
            out.append(_err("E_REF", f"subsystem '{s.id}' refers to unknown layer {s.layer}",
                            s.span))
        for m in s.modules:
            _check_ident("module", m, s.span, out)
    for d in dv.dependencies:
        for end in (d.source, d.target):
            if end not in subs:
                out.append(_err("E_REF", f"unresolved subsystem '{end}'", d.span))
        if d.source == d.target:
            out.append(_err("E_INVALID", f"subsystem '{d.source}' depends on itself", d.span))


def _resolve_physical(ph: PhysicalView, pv: Optional[ProcessView], out: list) -> None:
    nodes = {n.id for n in ph.nodes}
    procs = {p.id for p in pv.processes} if pv else set()
    for n in ph.nodes:
        _check_ident("node", n.id, n.span, out)
        _positive(f"capacity of node '{n.id}'", n.capacity, n.span, out)
    for l in ph.links:
        _check_ident("link", l.id, l.span, out)
        _enum("link medium", l.medium, MEDIA, l.span, out)
        _positive(f"bandwidth of link '{l.id}'", l.bandwidth, l.span, out)
        if len(set(l.endpoints)) < 2:
            out.append(_err("E_INVALID", f"link '{l.id}' needs at least two distinct nodes",
                            l.span))
        for e in l.endpoints:
            if e not in nodes:
                out.append(_err("E_REF", f"unresolved node '{e}'", l.span))
    for cfg in ph.configurations:
        _check_ident("configuration", cfg.name, cfg.span, out)
        for pl in cfg.placement:
            if pl.process not in procs:
                out.append(_err("E_REF", f"unresolved process '{pl.process}'",
                                pl.span or cfg.span))
            for n in pl.nodes:
                if n not in nodes:
                    out.append(_err("E_REF", f"unresolved node '{n}'", pl.span or cfg.span))


def _resolve_scenarios(sv: ScenarioView, out: list) -> None:
    for s in sv.scenarios:
        _check_ident("scenario", s.id, s.span, out)
        _positive(f"frequency of scenario '{s.id}'", s.frequency_hz, s.span, out,
                  allow_zero=True)
        seqs = [st.seq for st in s.steps]
        if sorted(seqs) != list(range(1, len(seqs) + 1)) and len(set(seqs)) == len(seqs):
            out.append(_err("E_INVALID",
                            f"steps of scenario '{s.id}' must be numbered 1..{len(seqs)}",
                            s.span))
        for st in s.steps:
            if st.connector_hint is not None:
                _enum("connector kind", st.connector_hint, CONNECTOR_KINDS, st.span, out)


def resolve(model: ArchitectureModel) -> list[Diagnostic]:
    """Reference resolution and well-formedness; returns error diagnostics.

    Step class/operation references are left to the checker (rule S001) so
    that scenarios scripted against a sketch architecture can still resolve.
    """
    out: list[Diagnostic] = []
    _check_ident("architecture", model.name, model.span, out)
    present = view_presence(model)
    if not present:
        out.append(_err("E_INVALID", "architecture declares no views", model.span))
    if "scenarios" in present and "logical" not in present:
        out.append(_err("E_INVALID", "scenarios require a logical view", model.span))
    out += find_duplicates(model)

    lv, pv, dv = model.logical, model.process, model.development
    if lv:
        _resolve_logical(lv, out)
    if pv:
        _resolve_process(pv, out)
    if dv:
        _resolve_development(dv, out)
    if model.physical:
        _resolve_physical(model.physical, pv, out)
    if model.scenarios:
        _resolve_scenarios(model.scenarios, out)

    classes = lv.class_map() if lv else {}
    tasks = pv.process_of() if pv else {}
    for e in model.l2p:
        if e.cls not in classes:
            out.append(_err("E_REF", f"unresolved class '{e.cls}'", e.span))
        if not e.tasks:
            out.append(_err("E_INVALID", f"class '{e.cls}' is mapped to no tasks", e.span))
        for t in e.tasks:
            if t not in tasks:
                out.append(_err("E_REF", f"unresolved task '{t}'", e.span))
    modules = {(s.id, m) for s in dv.subsystems for m in s.modules} if dv else set()
    subs = {s.id for s in dv.subsystems} if dv else set()
    for e in model.l2d:
        if e.cls not in classes:
            out.append(_err("E_REF", f"unresolved class '{e.cls}'", e.span))
        if not e.modules:
            out.append(_err("E_INVALID", f"class '{e.cls}' is mapped to no modules", e.span))
        for sub, mod in e.modules:
            if sub not in subs:
                out.append(_err("E_REF", f"unresolved subsystem '{sub}'", e.span))
            elif (sub, mod) not in modules:
                out.append(_err("E_REF", f"unresolved module '{sub}.{mod}'", e.span))
    return sort_diagnostics(out)
