"""Software Architecture Document generation (Markdown)."""

from __future__ import annotations

import hashlib
from typing import Iterable, Optional

from .loadsim import LoadReport
from .model import ArchitectureModel, Diagnostic, sort_diagnostics
from .parser import format_model
from .render import to_dot

OUTLINE = (
    "Title Page",
    "Change History",
    "Table of Contents",
    "List of Figures",
    "1. Scope",
    "2. References",
    "3. Software Architecture",
    "4. Architectural Goals & Constraints",
    "5. Logical Architecture",
    "6. Process Architecture",
    "7. Development Architecture",
    "8. Physical Architecture",
    "9. Scenarios",
    "10. Size and Performance",
    "11. Quality",
    "Appendices",
    "A. Acronyms and Abbreviations",
    "B. Definitions",
    "C. Design Principles",
)
APPENDICES = OUTLINE[-3:]
OMITTED = "View omitted (tailored out)."

ACRONYMS = (
    ("DOT", "Graphviz graph description language"),
    ("KSLOC", "thousands of source lines of code"),
    ("L2D", "logical-to-development mapping"),
    ("L2P", "logical-to-process mapping"),
    ("RPC", "remote procedure call"),
    ("SAD", "Software Architecture Document"),
)

DEFINITIONS = (
    ("Agent task", "a thread of control that executes the operations of one or more classes."),
    ("Configuration", "a named placement of process replicas onto processing nodes."),
    ("Layer", "a stratum of subsystems; dependencies point sideways or down only."),
    ("Major task", "a task other elements can address directly; it may not assume "
                   "where its peers run."),
    ("Minor task", "a helper task local to one process (scanning, buffering, timers)."),
    ("Scenario", "an ordered script of (object, operation) steps."),
    ("View", "one of the logical, process, development, physical and scenario "
             "perspectives on the architecture."),
)


def _table(header: tuple[str, ...], rows: Iterable[tuple]) -> list[str]:
    def cell(x) -> str:
        if x is None:
            return ""
        if isinstance(x, float):
            return f"{x:g}"
        return str(x).replace("|", "\\|").replace("\n", " ")

    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(cell(c) for c in row) + " |" for row in rows]
    return out


def _prose(text: str) -> str:
    # free text must not open a heading or fence of its own
    return "\n".join("\\" + ln if ln.lstrip().startswith(("#", "```")) else ln
                     for ln in text.split("\n"))


def _dot(model, view, scenario=None) -> list[str]:
    return ["```dot", *to_dot(model, view, scenario).rstrip("\n").split("\n"), "```"]


def content_hash(model: ArchitectureModel) -> str:
    return hashlib.sha256(format_model(model).encode("utf-8")).hexdigest()[:12]


def _figures(model: ArchitectureModel) -> list[str]:
    figs = []
    if model.logical:
        figs.append("Logical blueprint")
    if model.process:
        figs.append("Process blueprint")
    if model.development:
        figs.append("Development blueprint")
    if model.physical:
        figs.append("Physical blueprint")
    if model.scenarios:
        figs += [f"Scenario {s.id}" for s in model.scenarios.scenarios]
    return figs


def _logical(model) -> list[str]:
    lv = model.logical
    out = []
    if lv.rationale:
        out += [_prose(lv.rationale), ""]
    out += ["Class categories:", ""]
    out += _table(("Category", "Name", "Classes"),
                  ((c.id, c.name, ", ".join(c.classes)) for c in lv.categories))
    out += ["", "Classes:", ""]
    out += _table(("Class", "Name", "Category", "Autonomy", "Persistence", "Subordinate to",
                   "Distributed", "Utility", "Operations"),
                  ((c.id, c.name, c.category, c.autonomy, c.persistence, c.subordinate_to,
                    "yes" if c.distributed else "no", "yes" if c.utility else "no",
                    ", ".join(c.operations)) for c in lv.classes))
    if lv.relations:
        out += ["", "Relations:", ""]
        out += _table(("Kind", "From", "To"), ((r.kind, r.source, r.target) for r in lv.relations))
    return out + ["", *_dot(model, "logical")]


def _process(model) -> list[str]:
    pv = model.process
    out = []
    if pv.rationale:
        out += [_prose(pv.rationale), ""]
    out += _table(("Process", "Replicas", "Task", "Kind", "Period (ms)"),
                  ((p.id, p.replicas, t.id, t.kind, t.period_ms) for p in pv.processes
                   for t in p.tasks))
    if pv.connectors:
        out += ["", "Connectors:", ""]
        out += _table(("Kind", "From", "To"),
                      ((c.kind, c.source, c.target) for c in pv.connectors))
    if model.l2p:
        out += ["", "Class to task mapping:", ""]
        out += _table(("Class", "Tasks"), ((e.cls, ", ".join(e.tasks)) for e in model.l2p))
    return out + ["", *_dot(model, "process")]


def _development(model) -> list[str]:
    dv = model.development
    out = []
    if dv.rationale:
        out += [_prose(dv.rationale), ""]
    out += _table(("Layer", "Name", "Responsibility"),
                  ((l.number, l.name, l.responsibility) for l in dv.layers))
    out += [""]
    out += _table(("Subsystem", "Name", "Layer", "KSLOC", "Modules"),
                  ((s.id, s.name, s.layer, s.ksloc, ", ".join(s.modules))
                   for s in dv.subsystems))
    if dv.dependencies:
        out += ["", "Dependencies:", ""]
        out += _table(("From", "To"), ((d.source, d.target) for d in dv.dependencies))
    if model.l2d:
        out += ["", "Class to module mapping:", ""]
        out += _table(("Class", "Modules"),
                      ((e.cls, ", ".join(f"{s}.{m}" for s, m in e.modules)) for e in model.l2d))
    return out + ["", *_dot(model, "development")]


def _physical(model) -> list[str]:
    ph = model.physical
    out = []
    if ph.rationale:
        out += [_prose(ph.rationale), ""]
    out += _table(("Node", "Name", "Capacity"), ((n.id, n.name, n.capacity) for n in ph.nodes))
    if ph.links:
        out += [""]
        out += _table(("Link", "Medium", "Nodes", "Bandwidth"),
                      ((l.id, l.medium, ", ".join(l.endpoints), l.bandwidth) for l in ph.links))
    for cfg in ph.configurations:
        out += ["", f"Configuration `{cfg.name}`:", ""]
        out += _table(("Process", "Nodes"),
                      ((p.process, ", ".join(p.nodes)) for p in cfg.placement))
    return out + ["", *_dot(model, "physical")]


def _scenarios(model) -> list[str]:
    out = []
    if model.scenarios.rationale:
        out += [_prose(model.scenarios.rationale), ""]
    for s in model.scenarios.scenarios:
        freq = "" if s.frequency_hz is None else f" ({s.frequency_hz:g} Hz)"
        out += [f"### Scenario {s.id}: {s.name}{freq}", ""]
        out += [f"{st.seq}. `{st.source}` -> `{st.target}.{st.operation}`"
                + (f" via {st.connector_hint}" if st.connector_hint else "")
                for st in s.steps]
        out += ["", *_dot(model, "scenario", s.id), ""]
    return out[:-1] if out and out[-1] == "" else out


def _size(model, report: Optional[LoadReport]) -> list[str]:
    out = []
    if model.development:
        sized = [s for s in model.development.subsystems if s.ksloc is not None]
        if sized:
            out += [f"Estimated size: {sum(s.ksloc for s in sized):g} KSLOC over "
                    f"{len(sized)} subsystem(s).", ""]
    if report is None:
        return out + ["No load estimate supplied."]
    out += [f"Load estimate for configuration `{report.config}`: "
            f"{report.total_msgs_per_sec:.6g} messages/sec in total.", ""]
    out += _table(("Process", "Messages/sec", "Cost units/sec", "Activations/sec"),
                  ((k, f"{v.msgs_per_sec:.6g}", f"{v.cost_per_sec:.6g}",
                    f"{v.activations_per_sec:.6g}")
                   for k, v in sorted(report.per_process.items())))
    out += [""]
    out += _table(("Node", "Cost units/sec", "Utilization"),
                  ((k, f"{v.cost_per_sec:.6g}",
                    "" if v.utilization is None else f"{v.utilization:.1%}")
                   for k, v in sorted(report.per_node.items())))
    return out


def _quality(diagnostics: list[Diagnostic]) -> list[str]:
    notes = [d for d in sort_diagnostics(diagnostics) if d.severity in ("warning", "info")]
    errors = sum(1 for d in diagnostics if d.severity == "error")
    out = [f"Consistency check: {errors} error(s), "
           f"{sum(1 for d in notes if d.severity == 'warning')} warning(s).", ""]
    if not notes:
        return out + ["No warnings or notes."]
    return out + [f"- {d.severity} {d.rule}: {d.message}" for d in notes]


def generate(model: ArchitectureModel, report: Optional[LoadReport] = None,
             diagnostics: Iterable[Diagnostic] = ()) -> str:
    """Render the architecture document for ``model`` as Markdown."""
    diagnostics = list(diagnostics)
    figures = _figures(model)
    views = {
        "5. Logical Architecture": ("logical", _logical),
        "6. Process Architecture": ("process", _process),
        "7. Development Architecture": ("development", _development),
        "8. Physical Architecture": ("physical", _physical),
        "9. Scenarios": ("scenarios", _scenarios),
    }
    present = [v for v, _ in views.values() if getattr(model, v) is not None]
    rationales = [(label, text) for label, text in (
        ("Architecture", model.rationale),
        ("Logical view", model.logical.rationale if model.logical else ""),
        ("Process view", model.process.rationale if model.process else ""),
        ("Development view", model.development.rationale if model.development else ""),
        ("Physical view", model.physical.rationale if model.physical else ""),
        ("Scenarios", model.scenarios.rationale if model.scenarios else ""),
    ) if text]

    body: dict[str, list[str]] = {
        "Title Page": [f"**Software Architecture Document: {model.name}**"],
        "Change History": [f"Generated from `{model.name}`, content hash "
                           f"{content_hash(model)}."],
        "Table of Contents": [f"- {h}" for h in OUTLINE[4:]],
        "List of Figures": ([f"{i}. {f}" for i, f in enumerate(figures, 1)]
                            or ["No figures."]),
        "1. Scope": [f"This document describes the software architecture of `{model.name}` "
                     f"through {len(present)} of five views: {', '.join(present)}."],
        "2. References": [f"- `{model.name}` architecture description (content hash "
                          f"{content_hash(model)})"],
        "3. Software Architecture": _overview(model, present),
        "4. Architectural Goals & Constraints": (
            [f"- **{label}:** {text}" for label, text in rationales]
            or ["No rationale recorded."]),
        "10. Size and Performance": _size(model, report),
        "11. Quality": _quality(diagnostics),
        "Appendices": [],
        "A. Acronyms and Abbreviations": [f"- **{a}**: {d}" for a, d in ACRONYMS],
        "B. Definitions": [f"- **{t}**: {d}" for t, d in DEFINITIONS],
        "C. Design Principles": ([f"- {text}" for _, text in rationales]
                                 or ["No design principles recorded."]),
    }
    for heading, (attr, fn) in views.items():
        body[heading] = fn(model) if getattr(model, attr) is not None else [OMITTED]

    lines: list[str] = []
    for heading in OUTLINE:
        level = "##" if heading in APPENDICES else "#"
        lines += [f"{level} {heading}", ""]
        if body[heading]:
            lines += body[heading] + [""]
    return "\n".join(lines).rstrip("\n") + "\n"


def _overview(model, present) -> list[str]:
    rows = []
    if model.logical:
        rows.append(("Logical", f"{len(model.logical.classes)} classes in "
                                f"{len(model.logical.categories)} categories"))
    if model.process:
        ntasks = sum(len(p.tasks) for p in model.process.processes)
        rows.append(("Process", f"{len(model.process.processes)} processes, {ntasks} tasks"))
    if model.development:
        rows.append(("Development", f"{len(model.development.subsystems)} subsystems in "
                                    f"{len(model.development.layers)} layers"))
    if model.physical:
        rows.append(("Physical", f"{len(model.physical.nodes)} nodes, "
                                 f"{len(model.physical.configurations)} configurations"))
    if model.scenarios:
        rows.append(("Scenarios", f"{len(model.scenarios.scenarios)} scenarios"))
    return _table(("View", "Contents"), rows)
