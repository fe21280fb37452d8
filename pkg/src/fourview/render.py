"""DOT blueprints, one per view.

Booch icons are approximated with stock Graphviz shapes; the full table is
in docs/notation.md.
"""

from __future__ import annotations

from typing import Optional

from .model import ArchitectureModel, FourViewError

LEGEND = {
    "logical": "class=ellipse category=cluster; inheritance=solid/empty arrow, "
               "association=plain, containment=diamond tail, usage=dashed",
    "process": "task=box (minor tasks dashed) process=cluster; connectors labeled by kind",
    "development": "subsystem=box3d; layers are ranked clusters, layer 1 at the bottom",
    "physical": "node=house; links labeled by medium, multi-node links via a point",
    "scenario": "object=ellipse; steps are numbered edges 'n: operation'",
}

RELATION_STYLE = {
    "inheritance": "arrowhead=empty",
    "association": "arrowhead=none",
    "containment": "dir=both, arrowtail=diamond, arrowhead=none",
    "usage": "style=dashed",
}


def q(s: str) -> str:
    """Quote a DOT ID."""
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _graph(name: str, body: list[str], header: tuple[str, ...] = ()) -> str:
    lines = [f"// legend: {LEGEND[name]}"]
    if not body:
        lines.append(f"digraph {name} {{}}")
    else:
        lines.append(f"digraph {name} {{")
        lines += [f"  {h};" for h in header]
        lines += [f"  {b}" for b in body]
        lines.append("}")
    return "\n".join(lines) + "\n"


def _logical(model: ArchitectureModel) -> str:
    lv = model.logical
    body: list[str] = []
    placed = set()
    for cat in lv.categories:
        inner = []
        for c in lv.classes:
            if c.category == cat.id and c.id in cat.classes and c.id not in placed:
                inner.append(_class_node(c))
                placed.add(c.id)
        body.append(f"subgraph {q('cluster_' + cat.id)} {{")
        body.append(f"  label={q(cat.name)};")
        body += [f"  {x}" for x in inner]
        body.append("}")
    for c in lv.classes:
        if c.id not in placed:
            body.append(_class_node(c))
    for r in lv.relations:
        body.append(f"{q(r.source)} -> {q(r.target)} [{RELATION_STYLE[r.kind]}];")
    return _graph("logical", body)


def _class_node(c) -> str:
    attrs = f"shape=ellipse, label={q(c.name)}"
    if c.utility:
        attrs += ", peripheries=2"
    return f"{q(c.id)} [{attrs}];"


def _process(model: ArchitectureModel) -> str:
    pv = model.process
    body: list[str] = []
    for p in pv.processes:
        label = p.name if p.replicas == 1 else f"{p.name} x{p.replicas}"
        body.append(f"subgraph {q('cluster_' + p.id)} {{")
        body.append(f"  label={q(label)};")
        for t in p.tasks:
            tl = t.name if t.period_ms is None else f"{t.name} ({t.period_ms:g} ms)"
            style = ", style=dashed" if t.kind == "minor" else ""
            body.append(f"  {q(t.id)} [shape=box, label={q(tl)}{style}];")
        body.append("}")
    for c in pv.connectors:
        body.append(f"{q(c.source)} -> {q(c.target)} [label={q(c.kind)}];")
    return _graph("process", body)


def _development(model: ArchitectureModel) -> str:
    dv = model.development
    body: list[str] = []
    for layer in dv.layers:
        anchor = f"layer_{layer.number}"
        body.append(f"subgraph {q('cluster_' + anchor)} {{")
        body.append(f"  label={q(f'{layer.number}: {layer.name}')};")
        body.append("  rank=same;")
        body.append(f"  {q(anchor)} [shape=plaintext, label={q(str(layer.number))}];")
        for s in dv.subsystems:
            if s.layer == layer.number:
                body.append(f"  {q(s.id)} [shape=box3d, label={q(s.name)}];")
        body.append("}")
    for lo, hi in zip(dv.layers, dv.layers[1:]):
        body.append(f"{q(f'layer_{lo.number}')} -> {q(f'layer_{hi.number}')} [style=invis];")
    for d in dv.dependencies:
        body.append(f"{q(d.source)} -> {q(d.target)};")
    return _graph("development", body, ("rankdir=BT",) if body else ())


def _physical(model: ArchitectureModel) -> str:
    ph = model.physical
    body: list[str] = []
    for n in ph.nodes:
        label = n.name if n.capacity is None else f"{n.name} ({n.capacity:g}/s)"
        body.append(f"{q(n.id)} [shape=house, label={q(label)}];")
    for link in ph.links:
        label = link.medium if link.bandwidth is None else f"{link.medium} {link.bandwidth:g}/s"
        if len(link.endpoints) == 2:
            a, b = link.endpoints
            body.append(f"{q(a)} -> {q(b)} [dir=none, label={q(label)}];")
        else:
            hub = f"link_{link.id}"
            body.append(f"{q(hub)} [shape=point, xlabel={q(label)}];")
            for e in link.endpoints:
                body.append(f"{q(hub)} -> {q(e)} [dir=none];")
    return _graph("physical", body)


def _scenario(model: ArchitectureModel, scenario_id: str) -> str:
    sc = model.scenarios.get(scenario_id)
    if sc is None:
        raise FourViewError("E_NOSCENARIO", f"unknown scenario '{scenario_id}'")
    classes = model.logical.class_map()
    objs = sorted({st.source for st in sc.steps} | {st.target for st in sc.steps})
    body = [f"label={q(sc.name)};"] if sc.steps else []
    for o in objs:
        name = classes[o].name if o in classes else o
        body.append(f"{q(o)} [shape=ellipse, label={q(name)}];")
    for st in sc.steps:
        style = "" if st.connector_hint is None else f", tooltip={q(st.connector_hint)}"
        body.append(f"{q(st.source)} -> {q(st.target)} [label={q(f'{st.seq}: {st.operation}')}"
                    f"{style}];")
    return _graph("scenario", body)


def to_dot(model: ArchitectureModel, view: str, scenario: Optional[str] = None) -> str:
    """DOT source for one view of ``model``. Raises E_NOVIEW if it is absent."""
    attr = "scenarios" if view == "scenario" else view
    if attr not in ("logical", "process", "development", "physical", "scenarios"):
        raise ValueError(f"unknown view {view!r}")
    if getattr(model, attr) is None:
        raise FourViewError("E_NOVIEW", f"{attr} view is absent")
    if view == "scenario":
        if scenario is None:
            raise ValueError("view 'scenario' needs a scenario id")
        return _scenario(model, scenario)
    return {"logical": _logical, "process": _process, "development": _development,
            "physical": _physical}[view](model)
