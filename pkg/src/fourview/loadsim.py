"""Analytic steady-state load estimate for a process/physical configuration.

Every scenario is traced onto tasks. A hop that crosses processes adds the
scenario frequency to its connector and to the receiving process; every
mapped hop adds ``frequency * est_cost(receiving class)`` cost units per
second to the process running the receiving task. Cyclic tasks add a dummy
load of ``1000 / period_ms`` activations per second, each costing as much as
the cheapest class the process hosts. Process load is split evenly across
replicas; nodes sum the replicas placed on them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .checker import CheckOptions, check, trace
from .model import ArchitectureModel, Diagnostic, FourViewError, sort_diagnostics


@dataclass
class ProcessLoad:
    msgs_per_sec: float = 0.0
    cost_per_sec: float = 0.0
    activations_per_sec: float = 0.0


@dataclass
class NodeLoad:
    cost_per_sec: float = 0.0
    capacity: Optional[float] = None

    @property
    def utilization(self) -> Optional[float]:
        if self.capacity is None:
            return None
        return self.cost_per_sec / self.capacity


@dataclass
class LinkLoad:
    msgs_per_sec: float = 0.0
    bandwidth: Optional[float] = None


@dataclass
class LoadReport:
    config: str
    per_process: dict[str, ProcessLoad] = field(default_factory=dict)
    per_connector: dict[str, float] = field(default_factory=dict)
    per_node: dict[str, NodeLoad] = field(default_factory=dict)
    per_link: dict[str, LinkLoad] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def total_msgs_per_sec(self) -> float:
        return sum(self.per_connector.values())

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "total_msgs_per_sec": _sig(self.total_msgs_per_sec),
            "per_process": {
                k: {"msgs_per_sec": _sig(v.msgs_per_sec),
                    "cost_per_sec": _sig(v.cost_per_sec),
                    "activations_per_sec": _sig(v.activations_per_sec)}
                for k, v in sorted(self.per_process.items())},
            "per_connector": {k: _sig(v) for k, v in sorted(self.per_connector.items())},
            "per_node": {
                k: {"cost_per_sec": _sig(v.cost_per_sec),
                    "capacity": v.capacity,
                    "utilization": None if v.utilization is None else _sig(v.utilization)}
                for k, v in sorted(self.per_node.items())},
            "per_link": {
                k: {"msgs_per_sec": _sig(v.msgs_per_sec), "bandwidth": v.bandwidth}
                for k, v in sorted(self.per_link.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_table(self) -> str:
        rows: list[tuple[str, ...]] = [("section", "element", "msgs/s", "cost/s", "util")]
        for k, v in sorted(self.per_process.items()):
            rows.append(("process", k, _fmt(v.msgs_per_sec), _fmt(v.cost_per_sec), ""))
        for k, v in sorted(self.per_connector.items()):
            rows.append(("connector", k, _fmt(v), "", ""))
        for k, v in sorted(self.per_node.items()):
            util = "" if v.utilization is None else f"{v.utilization:.1%}"
            rows.append(("node", k, "", _fmt(v.cost_per_sec), util))
        for k, v in sorted(self.per_link.items()):
            rows.append(("link", k, _fmt(v.msgs_per_sec), "", ""))
        rows.append(("total", "", _fmt(self.total_msgs_per_sec), "", ""))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
        return "\n".join(lines) + "\n"


def _sig(x: float) -> float:
    return float(f"{x:.6g}")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _link_between(links, a: str, b: str) -> Optional[str]:
    for link in links:
        if a in link.endpoints and b in link.endpoints:
            return link.id
    return None


def estimate(model: ArchitectureModel, config: str,
             options: Optional[CheckOptions] = None) -> LoadReport:
    """Estimate message and cost rates under physical configuration ``config``."""
    ph = model.physical
    cfg = ph.configuration(config) if ph is not None else None
    if cfg is None:
        raise FourViewError("E_NOCONFIG", f"unknown configuration '{config}'")
    errors = [d for d in check(model, options) if d.severity == "error"]
    if errors:
        raise FourViewError("E_UNCHECKED",
                            f"model has {len(errors)} outstanding error(s); first: "
                            f"{errors[0].format()}")
    if model.process is None:
        raise FourViewError("E_UNCHECKED", "load estimation needs a process view")

    pv = model.process
    classes = model.logical.class_map() if model.logical else {}
    owner = pv.process_of()
    report = LoadReport(config)
    for p in pv.processes:
        report.per_process[p.id] = ProcessLoad()
    for c in pv.connectors:
        report.per_connector[c.label] = 0.0
    for n in ph.nodes:
        report.per_node[n.id] = NodeLoad(capacity=n.capacity)
    for link in ph.links:
        report.per_link[link.id] = LinkLoad(bandwidth=link.bandwidth)
    diags: list[Diagnostic] = []
    flows: list[tuple[str, str, float]] = []  # (sending process, receiving process, rate)

    scenarios = model.scenarios.scenarios if model.scenarios else ()
    for s in scenarios:
        if s.frequency_hz is None:
            diags.append(Diagnostic("info", "T001",
                                    f"scenario '{s.id}' has no frequency; contributes no load",
                                    s.span))
            continue
        freq = s.frequency_hz
        tr, _ = trace(model, s.id)
        steps = {st.seq: st for st in s.steps}
        for hop in tr.hops:
            st = steps[hop.seq]
            if not hop.mapped:
                diags.append(Diagnostic("warning", "M001",
                                        f"scenario '{s.id}' step {hop.seq} is unmapped; "
                                        "contributes no load", st.span))
                continue
            receiver = owner[hop.to_task]
            cost = classes[st.target].est_cost if st.target in classes else 1.0
            report.per_process[receiver].cost_per_sec += freq * cost
            if hop.crossing == "cross_process":
                key = hop.connector.label if hop.connector else \
                    f"{hop.from_task}->{hop.to_task} (undeclared)"
                report.per_connector[key] = report.per_connector.get(key, 0.0) + freq
                report.per_process[receiver].msgs_per_sec += freq
                flows.append((owner[hop.from_task], receiver, freq))

    hosted: dict[str, list[float]] = {p.id: [] for p in pv.processes}
    for e in model.l2p:
        for t in e.tasks:
            if e.cls in classes:
                hosted[owner[t]].append(classes[e.cls].est_cost)
    for p in pv.processes:
        unit = min(hosted[p.id]) if hosted[p.id] else 1.0
        for t in p.tasks:
            if t.period_ms is not None:
                rate = 1000.0 / t.period_ms
                load = report.per_process[p.id]
                load.activations_per_sec += rate
                load.cost_per_sec += rate * unit

    for p in pv.processes:
        nodes = cfg.nodes_for(p.id)
        for n in nodes:
            report.per_node[n].cost_per_sec += report.per_process[p.id].cost_per_sec / len(nodes)

    for sender, receiver, rate in flows:
        src_nodes, dst_nodes = cfg.nodes_for(sender), cfg.nodes_for(receiver)
        if not src_nodes or not dst_nodes:
            continue
        share = rate / len(src_nodes) / len(dst_nodes)
        for a in src_nodes:
            for b in dst_nodes:
                if a == b:
                    continue
                link = _link_between(ph.links, a, b)
                if link is None:
                    diags.append(Diagnostic("warning", "PH01",
                                            f"no link joins nodes '{a}' and '{b}' "
                                            f"(traffic {sender} -> {receiver})", cfg.span))
                else:
                    report.per_link[link].msgs_per_sec += share
    report.diagnostics = sort_diagnostics(set(diags))
    return report
