"""Synthesis of a process view and class-to-task mapping from a logical view.

Both strategies first group classes into *units*: a root class (one that is
not subordinate to anything) together with all of its subordinates, and
with mutual-exclusion groups fused into a single unit. Every class of a
unit ends up with the same task list, which is what keeps subordinates
co-located with their master and serialized classes on one agent.

Generated identifiers use fixed prefixes so they cannot collide:
processes ``proc_*`` (agents), ``srv_*`` (servers), ``client_*`` and
``util``; tasks ``agent_*``, ``server_*`` and ``util_task``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .model import (
    Connector,
    IDENT_RE,
    FourViewError,
    L2PEntry,
    LogicalView,
    Process,
    ProcessView,
    Task,
)


@dataclass(frozen=True)
class MapperConstraints:
    max_processes: int = 8
    mutual_exclusion_groups: tuple[frozenset[str], ...] = ()
    stimuli: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mutual_exclusion_groups",
                           tuple(frozenset(g) for g in self.mutual_exclusion_groups))
        object.__setattr__(self, "stimuli", tuple(tuple(s) for s in self.stimuli))


@dataclass(frozen=True)
class MappingResult:
    process_view: ProcessView
    l2p: tuple[L2PEntry, ...]
    log: tuple[str, ...]

    def log_lines(self) -> list[str]:
        return [f"MAP: {line}" for line in self.log]


@dataclass
class _Unit:
    id: str
    roots: list[str]
    members: list[str]
    active: bool
    grouped: bool
    needs_server: bool
    replicated: bool
    tasks: list[str] = field(default_factory=list)


class _Builder:
    """Mutable scratch state shared by both strategies."""

    def __init__(self, logical: LogicalView, constraints: MapperConstraints):
        if constraints.max_processes < 1:
            raise ValueError("max_processes must be >= 1")
        self.lv = logical
        self.cons = constraints
        self.classes = logical.class_map()
        for group in constraints.mutual_exclusion_groups:
            for cid in sorted(group):
                if cid not in self.classes:
                    raise FourViewError("E_REF", f"mutual-exclusion group names unknown class '{cid}'")
        self.log: list[str] = []
        self.procs: dict[str, dict] = {}  # id -> {"tasks": [...], "replicas": n, "kind": str}
        self.task_kind: dict[str, str] = {}
        self.units = self._units()
        self.unit_of = {m: u.id for u in self.units.values() for m in u.members}

    # -- units ---------------------------------------------------------------

    def root(self, cid: str) -> str:
        seen = set()
        while self.classes[cid].subordinate_to is not None and cid not in seen:
            seen.add(cid)
            cid = self.classes[cid].subordinate_to
        return cid

    def _units(self) -> dict[str, _Unit]:
        g = nx.Graph()
        roots = sorted({self.root(c) for c in self.classes})
        g.add_nodes_from(roots)
        grouped = set()
        for group in self.cons.mutual_exclusion_groups:
            rs = sorted({self.root(c) for c in group})
            grouped.update(rs)
            g.add_edges_from(zip(rs, rs[1:]))
        members: dict[str, list[str]] = {}
        for c in sorted(self.classes):
            members.setdefault(self.root(c), []).append(c)
        units = {}
        for comp in nx.connected_components(g):
            rs = sorted(comp)
            cls = [self.classes[r] for r in rs]
            uid = rs[0]
            everyone = sorted(m for r in rs for m in members[r])
            units[uid] = _Unit(
                id=uid,
                roots=rs,
                members=everyone,
                # an active subordinate still needs a thread: its master's unit gets an agent
                active=any(self.classes[m].autonomy == "active" for m in everyone),
                grouped=any(r in grouped for r in rs),
                needs_server=any(c.persistence == "permanent" or c.distributed for c in cls),
                replicated=any(c.persistence == "permanent" and c.distributed for c in cls),
            )
        return dict(sorted(units.items()))

    def related_units(self, uid: str, kinds=None) -> list[str]:
        mine = set(self.units[uid].members)
        out = set()
        for r in self.lv.relations:
            if kinds is not None and r.kind not in kinds:
                continue
            if r.source in mine and r.target not in mine:
                out.add(self.unit_of[r.target])
            elif r.target in mine and r.source not in mine:
                out.add(self.unit_of[r.source])
        return sorted(out)

    # -- process bookkeeping --------------------------------------------------

    def add_process(self, pid: str, kind: str, replicas: int = 1) -> str:
        self.procs[pid] = {"tasks": [], "replicas": replicas, "kind": kind}
        return pid

    def add_task(self, pid: str, tid: str, kind: str = "major") -> str:
        self.procs[pid]["tasks"].append(tid)
        self.task_kind[tid] = kind
        return tid

    def process_of_task(self, tid: str) -> str:
        for pid, p in self.procs.items():
            if tid in p["tasks"]:
                return pid
        raise KeyError(tid)

    def process_cost(self, pid: str) -> float:
        tasks = set(self.procs[pid]["tasks"])
        return sum(self.classes[c].est_cost for u in self.units.values() if set(u.tasks) & tasks
                   for c in u.members)

    def merge_to_budget(self) -> None:
        while len(self.procs) > self.cons.max_processes:
            a, b = sorted(self.procs, key=lambda p: (self.process_cost(p), p))[:2]
            keep, drop = min(a, b), max(a, b)
            ca, cb = self.process_cost(a), self.process_cost(b)
            gone = self.procs.pop(drop)
            self.procs[keep]["tasks"].extend(gone["tasks"])
            self.procs[keep]["replicas"] = max(self.procs[keep]["replicas"], gone["replicas"])
            self.log.append(f"merge {drop} into {keep} (costs {ca:g} + {cb:g}); "
                            f"{len(self.procs)} processes remain")

    # -- result ---------------------------------------------------------------

    def result(self) -> MappingResult:
        self.merge_to_budget()
        owner = {t: pid for pid, p in self.procs.items() for t in p["tasks"]}
        class_tasks = {c: self.units[self.unit_of[c]].tasks for c in self.classes}
        conns: dict[tuple[str, str], str] = {}
        # relation-linked classes in different processes talk by message
        for r in self.lv.relations:
            ta, tb = class_tasks[r.source][0], class_tasks[r.target][0]
            if owner[ta] != owner[tb]:
                conns.setdefault((ta, tb), "message")
        for c, tasks in class_tasks.items():
            for t in tasks[1:]:
                if owner[t] != owner[tasks[0]]:
                    conns.setdefault((tasks[0], t), "message")
        for pid, p in self.procs.items():
            ts = sorted(p["tasks"])
            for i, a in enumerate(ts):
                for b in ts[i + 1:]:
                    if (a, b) not in conns and (b, a) not in conns:
                        conns[(a, b)] = "shared_memory"
        processes = tuple(
            Process(pid, pid, tuple(Task(t, t, self.task_kind[t]) for t in p["tasks"]),
                    p["replicas"])
            for pid, p in sorted(self.procs.items()))
        connectors = tuple(Connector(k, a, b) for (a, b), k in conns.items())
        l2p = tuple(L2PEntry(c, tuple(class_tasks[c])) for c in sorted(self.classes))
        return MappingResult(ProcessView(processes, connectors, "generated by mapper"),
                             l2p, tuple(self.log))


def _attach_subordinates(b: _Builder) -> None:
    for u in b.units.values():
        for m in u.members:
            master = b.classes[m].subordinate_to
            if master is not None:
                b.log.append(f"attach {m} to the agent of its master {master}")


def inside_out(logical: LogicalView, constraints: MapperConstraints) -> MappingResult:
    """Cluster classes onto agents, starting from the logical view.

    Active units get an agent process; subordinates ride on their master's
    agent; mutual-exclusion groups share one agent; permanent or distributed
    units get a server process (two replicas when both permanent and
    distributed). Serialized groups without an active class are hosted in
    the server of a related active unit when one exists. Remaining passive
    classes join the first agent process that uses them, else a shared
    utility process. Processes are then merged cheapest-first until the
    budget holds.
    """
    b = _Builder(logical, constraints)
    units = b.units

    for u in units.values():
        if u.active:
            pid = b.add_process(f"proc_{u.id}", "agent")
            u.tasks.append(b.add_task(pid, f"agent_{u.id}"))
            b.log.append(f"agent task agent_{u.id} in {pid} for active "
                         f"{'group ' if len(u.roots) > 1 else 'class '}{', '.join(u.roots)}")
    _attach_subordinates(b)
    for u in units.values():
        if u.grouped:
            b.log.append(f"mutual-exclusion group {', '.join(u.roots)} shares one agent")

    server_of: dict[str, str] = {}
    for u in units.values():
        if u.grouped and not u.active:
            continue
        if not u.needs_server:
            continue
        pid = b.add_process(f"srv_{u.id}", "server", 2 if u.replicated else 1)
        u.tasks.append(b.add_task(pid, f"server_{u.id}"))
        server_of[u.id] = pid
        b.log.append(f"server {pid} for {u.id}"
                     + (" replicated x2 (permanent and distributed)" if u.replicated else ""))
    for u in units.values():
        if not (u.grouped and not u.active):
            continue
        hosts = [server_of[r] for r in b.related_units(u.id)
                 if r in server_of and units[r].active]
        if hosts:
            pid = hosts[0]
            b.log.append(f"serialized {u.id} gets a single agent sharing server {pid}")
        else:
            pid = b.add_process(f"srv_{u.id}", "server", 2 if u.replicated else 1)
            server_of[u.id] = pid
            b.log.append(f"serialized {u.id} gets a single agent on its own server {pid}")
        u.tasks.append(b.add_task(pid, f"agent_{u.id}"))

    util: Optional[str] = None
    for u in units.values():
        if u.tasks:
            continue
        users = sorted(
            (b.process_of_task(units[b.unit_of[r.source]].tasks[0]), r.source)
            for r in logical.relations
            if r.kind == "usage" and r.target in u.members
            and r.source not in u.members
            and units[b.unit_of[r.source]].active)
        if users:
            pid, user = users[0]
            task = units[b.unit_of[user]].tasks[0]
            u.tasks.append(task)
            b.log.append(f"passive {u.id} joins {pid} (used by {user})")
        else:
            if util is None:
                util = b.add_process("util", "utility")
                b.add_task(util, "util_task")
            u.tasks.append("util_task")
            b.log.append(f"passive {u.id} joins shared utility process util")
    return b.result()


def outside_in(logical: LogicalView, constraints: MapperConstraints) -> MappingResult:
    """Derive clients from external stimuli and servers from service-only classes.

    One client process per distinct stimulus target (its unit). Passive or
    protected units reached by usage from the client side, and distributed
    or serialized units outside any client, become servers. Everything else
    joins the client of its nearest stimulus in the relation graph, ties by
    stimulus name. Processes are then merged cheapest-first until the budget
    holds.
    """
    if not constraints.stimuli:
        raise FourViewError("E_NOSTIMULI", "outside-in mapping needs at least one stimulus")
    b = _Builder(logical, constraints)
    units = b.units
    for name, target in constraints.stimuli:
        if not IDENT_RE.match(name):
            raise ValueError(f"stimulus name {name!r} is not a valid identifier")
        if target not in b.classes:
            raise FourViewError("E_REF", f"stimulus '{name}' targets unknown class '{target}'")

    client_of: dict[str, str] = {}  # unit -> client process
    stim_of: dict[str, str] = {}  # stimulus name -> target unit
    for name, target in sorted(constraints.stimuli):
        uid = b.unit_of[target]
        stim_of[name] = uid
        if uid in client_of:
            b.log.append(f"stimulus {name} shares client {client_of[uid]} (same target {uid})")
            continue
        pid = b.add_process(f"client_{name}", "client")
        units[uid].tasks.append(b.add_task(pid, f"agent_{uid}"))
        client_of[uid] = pid
        b.log.append(f"client {pid} handles stimulus {name} on {', '.join(units[uid].members)}")
    _attach_subordinates(b)

    client_side = {u.id for u in units.values() if u.id in client_of or u.active}
    servers: set[str] = set()
    frontier = sorted(client_side)
    while frontier:
        nxt = []
        for uid in frontier:
            for other in b.related_units(uid, kinds=("usage",)):
                o = units[other]
                uses = any(r.kind == "usage" and r.source in units[uid].members
                           and r.target in o.members for r in logical.relations)
                if uses and not o.active and other not in client_of and other not in servers:
                    servers.add(other)
                    nxt.append(other)
        frontier = sorted(nxt)
    for u in units.values():
        if u.id not in client_of and not u.active and (u.grouped or u.needs_server):
            servers.add(u.id)
    for uid in sorted(servers):
        u = units[uid]
        pid = b.add_process(f"srv_{uid}", "server", 2 if u.replicated else 1)
        u.tasks.append(b.add_task(pid, f"server_{uid}"))
        b.log.append(f"server {pid} for {uid} (provides services only)")

    g = nx.Graph()
    g.add_nodes_from(units)
    g.add_edges_from((b.unit_of[r.source], b.unit_of[r.target]) for r in logical.relations)
    dist = {name: nx.single_source_shortest_path_length(g, uid) for name, uid in stim_of.items()}
    for u in units.values():
        if u.tasks:
            continue
        inf = float("inf")
        name = min(sorted(stim_of), key=lambda s: dist[s].get(u.id, inf))
        pid = client_of[stim_of[name]]
        if u.active:
            u.tasks.append(b.add_task(pid, f"agent_{u.id}"))
            b.log.append(f"active {u.id} gets agent_{u.id} in client {pid} (nearest stimulus {name})")
        else:
            u.tasks.append(units[stim_of[name]].tasks[0])
            b.log.append(f"{u.id} joins client {pid} (nearest stimulus {name})")
    return b.result()
