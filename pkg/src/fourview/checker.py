"""Rule catalog evaluation and scenario tracing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import networkx as nx

from .model import (
    CONNECTOR_KINDS,
    INTER_PROCESS_KINDS,
    LOCAL_KINDS,
    VIEWS,
    ArchitectureModel,
    Connector,
    Diagnostic,
    FourViewError,
    Scenario,
    resolve,
    sort_diagnostics,
    view_presence,
)

SKETCH_DOWNGRADED = frozenset({"S001", "S002", "M001", "M004"})

# views a rule needs; a rule is skipped when any is absent
RULE_VIEWS: dict[str, tuple[str, ...]] = {
    "L001": ("logical",),
    "D001": ("development",),
    "D002": ("development",),
    "D003": ("development",),
    "D004": ("development",),
    "P001": ("process",),
    "P002": ("process",),
    "M001": ("logical", "process"),
    "M002": ("logical", "process"),
    "M003": ("logical", "process"),
    "M004": ("logical", "development"),
    "PH01": ("physical", "process"),
    "S001": ("scenarios", "logical"),
    "S002": ("scenarios", "logical", "process"),
}

LAYER_RANGE = (4, 6)
KSLOC_RANGE = (5.0, 20.0)


@dataclass(frozen=True)
class CheckOptions:
    mode: str = "strict"
    warnings_as_errors: bool = False
    disabled_rules: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.mode not in ("strict", "sketch"):
            raise ValueError(f"unknown check mode {self.mode!r}")
        object.__setattr__(self, "disabled_rules", frozenset(self.disabled_rules))


@dataclass(frozen=True)
class Hop:
    seq: int
    from_task: Optional[str]  # None when the acting class is unmapped
    to_task: Optional[str]
    crossing: Optional[str]  # same_task | same_process | cross_process; None if unmapped
    connector: Optional[Connector] = None

    @property
    def mapped(self) -> bool:
        return self.crossing is not None


@dataclass(frozen=True)
class Trace:
    scenario: str
    hops: tuple[Hop, ...]


_RULES: dict[str, Callable[[ArchitectureModel], Iterable[Diagnostic]]] = {}


def rule(rule_id: str):
    def deco(fn):
        _RULES[rule_id] = fn
        return fn
    return deco


def _d(severity: str, rule_id: str, message: str, span) -> Diagnostic:
    return Diagnostic(severity, rule_id, message, span)


# -- logical ----------------------------------------------------------------


@rule("L001")
def _l001(model):
    lv = model.logical
    listed: dict[str, list[str]] = {}
    for cat in lv.categories:
        for cid in cat.classes:
            listed.setdefault(cid, []).append(cat.id)
    for c in lv.classes:
        owners = listed.get(c.id, [])
        if c.category is None:
            yield _d("error", "L001", f"class '{c.id}' is not assigned to any category", c.span)
        elif c.category not in owners:
            yield _d("error", "L001",
                     f"class '{c.id}' is assigned to category '{c.category}' "
                     "which does not list it", c.span)
        if len(owners) > 1:
            yield _d("error", "L001",
                     f"class '{c.id}' is listed by several categories: {', '.join(owners)}",
                     c.span)


# -- development ------------------------------------------------------------


@rule("D001")
def _d001(model):
    dv = model.development
    layer = {s.id: s.layer for s in dv.subsystems}
    for d in dv.dependencies:
        src, dst = layer[d.source], layer[d.target]
        if dst > src:
            yield _d("error", "D001",
                     f"subsystem '{d.source}' (layer {src}) depends on '{d.target}' "
                     f"(layer {dst}); dependencies must stay in the same or a lower layer",
                     d.span)


@rule("D002")
def _d002(model):
    dv = model.development
    n = len(dv.layers)
    lo, hi = LAYER_RANGE
    if not lo <= n <= hi:
        span = dv.layers[0].span if dv.layers else None
        yield _d("warning", "D002", f"{n} layers declared; {lo} to {hi} is typical", span)


@rule("D003")
def _d003(model):
    lo, hi = KSLOC_RANGE
    for s in model.development.subsystems:
        if s.ksloc is not None and not lo <= s.ksloc <= hi:
            yield _d("warning", "D003",
                     f"subsystem '{s.id}' is {s.ksloc:g} KSLOC; {lo:g} to {hi:g} is typical",
                     s.span)


@rule("D004")
def _d004(model):
    dv = model.development
    layer = {s.id: s.layer for s in dv.subsystems}
    spans = {s.id: s.span for s in dv.subsystems}
    g = nx.DiGraph()
    g.add_edges_from((d.source, d.target) for d in dv.dependencies
                     if layer[d.source] == layer[d.target])
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            members = sorted(comp)
            yield _d("info", "D004",
                     f"dependency cycle within layer {layer[members[0]]}: "
                     f"{', '.join(members)}", spans[members[0]])


# -- process ----------------------------------------------------------------


@rule("P001")
def _p001(model):
    owner = model.process.process_of()
    for c in model.process.connectors:
        if c.kind in LOCAL_KINDS and owner[c.source] != owner[c.target]:
            yield _d("error", "P001",
                     f"{c.kind} connector {c.source} -> {c.target} joins processes "
                     f"'{owner[c.source]}' and '{owner[c.target]}'", c.span)


@rule("P002")
def _p002(model):
    kinds: dict[str, set[str]] = {}
    for c in model.process.connectors:
        kinds.setdefault(c.source, set()).add(c.kind)
        kinds.setdefault(c.target, set()).add(c.kind)
    for _, t in model.process.tasks():
        used = kinds.get(t.id)
        if t.kind == "major" and used and used <= set(LOCAL_KINDS):
            yield _d("warning", "P002",
                     f"major task '{t.id}' communicates only by {', '.join(sorted(used))}",
                     t.span)


# -- correspondence ---------------------------------------------------------


def _masters(classes) -> dict[str, set[str]]:
    """Class id -> every class it is (transitively) subordinate to."""
    out = {}
    for c in classes.values():
        chain, cur = set(), c.subordinate_to
        while cur is not None and cur in classes and cur not in chain:
            chain.add(cur)
            cur = classes[cur].subordinate_to
        out[c.id] = chain
    return out


@rule("M001")
def _m001(model):
    mapped = model.l2p_map()
    for c in model.logical.classes:
        if c.id not in mapped:
            yield _d("error", "M001", f"class '{c.id}' is not mapped to any task", c.span)


@rule("M002")
def _m002(model):
    mapped = model.l2p_map()
    for c in model.logical.classes:
        m = c.subordinate_to
        if m is None or c.id not in mapped or m not in mapped:
            continue
        extra = sorted(set(mapped[c.id]) - set(mapped[m]))
        if extra:
            yield _d("error", "M002",
                     f"class '{c.id}' is subordinate to '{m}' but runs on tasks "
                     f"{', '.join(extra)} outside its master's", c.span)


@rule("M003")
def _m003(model):
    # A task counts as c's own agent unless it also hosts another active class
    # that is not subordinate to c and is not multiplexed with c (same task list).
    classes = model.logical.class_map()
    mapped = model.l2p_map()
    masters = _masters(classes)
    occupants: dict[str, list[str]] = {}
    for cid, tasks in mapped.items():
        for t in tasks:
            occupants.setdefault(t, []).append(cid)
    for c in model.logical.classes:
        if c.autonomy != "active" or c.id not in mapped:
            continue
        mine = mapped[c.id]

        def rivals(task):
            return [o for o in occupants[task]
                    if o != c.id and o in classes
                    and classes[o].autonomy == "active"
                    and c.id not in masters[o]
                    and mapped[o] != mine]

        if all(rivals(t) for t in mine):
            yield _d("warning", "M003",
                     f"active class '{c.id}' has no agent task of its own", c.span)


@rule("M004")
def _m004(model):
    mapped = {e.cls for e in model.l2d}
    for c in model.logical.classes:
        if c.id not in mapped:
            yield _d("error", "M004", f"class '{c.id}' is not mapped to any module", c.span)


@rule("PH01")
def _ph01(model):
    procs = model.process.processes
    for cfg in model.physical.configurations:
        for p in procs:
            nodes = cfg.nodes_for(p.id)
            placed = any(pl.process == p.id for pl in cfg.placement)
            if not placed:
                yield _d("error", "PH01",
                         f"configuration '{cfg.name}' does not place process '{p.id}'",
                         cfg.span)
            elif len(nodes) != p.replicas:
                span = next(pl.span for pl in cfg.placement if pl.process == p.id) or cfg.span
                yield _d("error", "PH01",
                         f"configuration '{cfg.name}' places {len(nodes)} replica(s) of "
                         f"process '{p.id}', expected {p.replicas}", span)


# -- scenarios --------------------------------------------------------------


def _s001(model, scenario: Scenario) -> list[Diagnostic]:
    classes = model.logical.class_map()
    out = []
    for st in scenario.steps:
        for end in (st.source, st.target):
            if end not in classes:
                out.append(_d("error", "S001",
                              f"scenario '{scenario.id}' step {st.seq} references "
                              f"missing class '{end}'", st.span))
        if st.target in classes and st.operation not in classes[st.target].operations:
            out.append(_d("error", "S001",
                          f"scenario '{scenario.id}' step {st.seq}: class '{st.target}' "
                          f"has no operation '{st.operation}'", st.span))
    return out


@rule("S001")
def _s001_all(model):
    for s in model.scenarios.scenarios:
        yield from _s001(model, s)


def _select_connector(model, a: str, b: str, allowed, hint) -> Optional[Connector]:
    cands = [c for c in model.process.connectors
             if {c.source, c.target} == {a, b} and c.kind in allowed]
    if not cands:
        return None
    if hint is not None:
        hinted = [c for c in cands if c.kind == hint]
        if hinted:
            cands = hinted
    return min(cands, key=lambda c: (CONNECTOR_KINDS.index(c.kind), c.source != a))


def _trace(model, scenario: Scenario) -> tuple[Trace, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    if model.logical is not None:
        diags += _s001(model, scenario)
    mapped = model.l2p_map()
    owner = model.process.process_of() if model.process else {}
    hops = []
    for st in scenario.steps:
        src = mapped.get(st.source, (None,))[0] if model.process else None
        dst = mapped.get(st.target, (None,))[0] if model.process else None
        if src is None or dst is None:
            hops.append(Hop(st.seq, src, dst, None))
            continue
        if src == dst:
            hops.append(Hop(st.seq, src, dst, "same_task"))
        elif owner[src] == owner[dst]:
            conn = _select_connector(model, src, dst, CONNECTOR_KINDS, st.connector_hint)
            hops.append(Hop(st.seq, src, dst, "same_process", conn))
        else:
            conn = _select_connector(model, src, dst, INTER_PROCESS_KINDS, st.connector_hint)
            hops.append(Hop(st.seq, src, dst, "cross_process", conn))
            if conn is None:
                diags.append(_d("error", "S002",
                                f"scenario '{scenario.id}' step {st.seq}: no message, rpc "
                                f"or broadcast connector between tasks '{src}' "
                                f"('{owner[src]}') and '{dst}' ('{owner[dst]}')", st.span))
    return Trace(scenario.id, tuple(hops)), diags


@rule("S002")
def _s002_all(model):
    for s in model.scenarios.scenarios:
        _, diags = _trace(model, s)
        yield from (d for d in diags if d.rule == "S002")


def trace(model: ArchitectureModel, scenario: str) -> tuple[Trace, list[Diagnostic]]:
    """Resolve each step of ``scenario`` onto tasks and classify the hop.

    The first task of a class's L2P entry executes its objects. Hops between
    distinct tasks record the connector used: the lowest kind (enum order)
    among declared connectors of an allowed kind, preferring the step's
    ``via`` hint when one is declared.
    """
    sv = model.scenarios
    sc = sv.get(scenario) if sv is not None else None
    if sc is None:
        raise FourViewError("E_NOSCENARIO", f"unknown scenario '{scenario}'")
    tr, diags = _trace(model, sc)
    return tr, sort_diagnostics(diags)


# -- driver -----------------------------------------------------------------


def rules_requiring(view: str) -> frozenset[str]:
    return frozenset(r for r, views in RULE_VIEWS.items() if view in views)


def check(model: ArchitectureModel, options: Optional[CheckOptions] = None) -> list[Diagnostic]:
    """Evaluate every enabled rule whose views are present.

    If the model does not resolve, the resolution errors are returned alone.
    """
    options = options or CheckOptions()
    resolution = resolve(model)
    if resolution:
        return resolution
    present = view_presence(model)
    out: list[Diagnostic] = []
    for view in VIEWS:
        if view not in present and "T001" not in options.disabled_rules:
            skipped = ", ".join(sorted(rules_requiring(view)))
            out.append(_d("info", "T001", f"{view} view absent; skipped {skipped}", None))
    for rule_id, fn in _RULES.items():
        if rule_id in options.disabled_rules:
            continue
        if not all(v in present for v in RULE_VIEWS[rule_id]):
            continue
        for diag in fn(model):
            if options.mode == "sketch" and rule_id in SKETCH_DOWNGRADED \
                    and diag.severity == "error":
                diag = Diagnostic("warning", diag.rule, diag.message, diag.location)
            if options.warnings_as_errors and diag.severity == "warning":
                diag = Diagnostic("error", diag.rule, diag.message, diag.location)
            out.append(diag)
    return sort_diagnostics(out)


def count(diags: Iterable[Diagnostic]) -> dict[str, int]:
    out = {"error": 0, "warning": 0, "info": 0}
    for d in diags:
        out[d.severity] += 1
    return out
