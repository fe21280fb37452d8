"""Seeded random model generators for the property tests."""

from __future__ import annotations

import random
from dataclasses import replace

from fourview.model import (
    AUTONOMY,
    CONNECTOR_KINDS,
    MEDIA,
    RELATION_KINDS,
    ArchitectureModel,
    Class,
    ClassCategory,
    Configuration,
    Connector,
    DevDependency,
    DevelopmentView,
    L2DEntry,
    L2PEntry,
    LayerDef,
    Link,
    LogicalView,
    Node,
    PhysicalView,
    Placement,
    Relation,
    Process,
    ProcessView,
    Scenario,
    ScenarioView,
    Step,
    Subsystem,
    Task,
)

NAME_CHARS = 'abcXYZ _-"\\é漢#{}\t'


def name(rng: random.Random) -> str:
    return "".join(rng.choice(NAME_CHARS) for _ in range(rng.randint(0, 8)))


def number(rng: random.Random, zero: bool = False) -> float:
    r = rng.random()
    if zero and r < 0.1:
        return 0.0
    if r < 0.2:
        return float(rng.randint(1, 500))
    if r < 0.25:
        return rng.choice([1e-7, 2.5e20, 0.1, 1 / 3])
    return round(rng.uniform(0.01, 50), rng.randint(0, 6)) or 0.5


def random_logical(rng: random.Random, n_classes: tuple[int, int] = (1, 9)) -> LogicalView:
    n = rng.randint(*n_classes)
    cats = [f"cat{i}" for i in range(rng.randint(1, 3))]
    ids = [f"c{i}" for i in range(n)]
    classes = []
    for i, cid in enumerate(ids):
        classes.append(Class(
            id=cid,
            name=name(rng),
            category=rng.choice(cats),
            operations=tuple(f"op{j}" for j in range(rng.randint(0, 3))),
            autonomy=rng.choice(AUTONOMY),
            persistence=rng.choice(("transient", "permanent")),
            subordinate_to=ids[rng.randrange(i)] if i and rng.random() < 0.25 else None,
            distributed=rng.random() < 0.3,
            utility=rng.random() < 0.2,
            est_cost=number(rng, zero=True) if rng.random() < 0.7 else 1.0,
        ))
    categories = [ClassCategory(c, name(rng), tuple(k.id for k in classes if k.category == c))
                  for c in cats]
    relations = []
    for _ in range(rng.randint(0, 2 * n)):
        a, b = rng.randrange(n), rng.randrange(n)
        kind = rng.choice(RELATION_KINDS)
        if kind == "inheritance":
            if a == b:
                continue
            a, b = max(a, b), min(a, b)  # subclass -> superclass, acyclic by index
        relations.append((kind, ids[a], ids[b]))
    rels = tuple(Relation(k, a, b) for k, a, b in sorted(set(relations)))
    rng.shuffle(classes)
    return LogicalView(tuple(categories), tuple(classes), rels, name(rng))


def random_process(rng: random.Random) -> ProcessView:
    procs = []
    tid = 0
    for p in range(rng.randint(1, 4)):
        tasks = []
        for _ in range(rng.randint(1, 3)):
            tasks.append(Task(f"t{tid}", name(rng), rng.choice(("major", "minor")),
                              number(rng) if rng.random() < 0.3 else None))
            tid += 1
        procs.append(Process(f"p{p}", name(rng), tuple(tasks), rng.randint(1, 3)))
    all_tasks = [t.id for p in procs for t in p.tasks]
    conns = set()
    for _ in range(rng.randint(0, 2 * len(all_tasks))):
        a, b = rng.sample(all_tasks, 2) if len(all_tasks) > 1 else (None, None)
        if a is not None:
            conns.add((rng.choice(CONNECTOR_KINDS), a, b))
    return ProcessView(tuple(procs), tuple(Connector(*c) for c in sorted(conns)), name(rng))


def random_development(rng: random.Random) -> DevelopmentView:
    n_layers = rng.randint(1, 7)
    layers = tuple(LayerDef(i, name(rng) or f"L{i}", name(rng)) for i in range(1, n_layers + 1))
    subs = []
    for s in range(rng.randint(1, 8)):
        mods = tuple(f"m{j}" for j in range(rng.randint(0, 3)))
        subs.append(Subsystem(f"s{s}", name(rng), rng.randint(1, n_layers), mods,
                              rng.choice([None, float(rng.randint(1, 30)), number(rng)])))
    deps = set()
    for _ in range(rng.randint(0, 2 * len(subs))):
        if len(subs) > 1:
            a, b = rng.sample(range(len(subs)), 2)
            deps.add((f"s{a}", f"s{b}"))
    return DevelopmentView(layers, tuple(subs), tuple(DevDependency(a, b) for a, b in sorted(deps)),
                           name(rng))


def random_physical(rng: random.Random, pv: ProcessView | None) -> PhysicalView:
    nodes = tuple(Node(f"n{i}", name(rng), number(rng) if rng.random() < 0.5 else None)
                  for i in range(rng.randint(1, 4)))
    links = []
    if len(nodes) > 1:
        for i in range(rng.randint(0, 2)):
            k = rng.randint(2, len(nodes))
            ends = rng.sample([n.id for n in nodes], k)
            links.append(Link(f"l{i}", rng.choice(MEDIA), tuple(ends),
                              number(rng) if rng.random() < 0.5 else None))
    configs = []
    if pv is not None:
        for c in range(rng.randint(0, 2)):
            places = []
            for p in pv.processes:
                if rng.random() < 0.9:
                    reps = p.replicas if rng.random() < 0.8 else p.replicas + 1
                    places.append(Placement(p.id, tuple(rng.choice(nodes).id
                                                        for _ in range(reps))))
            configs.append(Configuration(f"cfg{c}", tuple(places)))
    return PhysicalView(nodes, tuple(links), tuple(configs), name(rng))


def random_scenarios(rng: random.Random, lv: LogicalView) -> ScenarioView:
    ids = [c.id for c in lv.classes]
    ops = {c.id: c.operations for c in lv.classes}
    scenarios = []
    for s in range(rng.randint(0, 3)):
        steps = []
        for seq in range(1, rng.randint(1, 6)):
            a, b = rng.choice(ids), rng.choice(ids)
            op = rng.choice(ops[b]) if ops[b] and rng.random() < 0.9 else "missing_op"
            hint = rng.choice((None,) + CONNECTOR_KINDS)
            steps.append(Step(seq, a, b, op, hint))
        freq = rng.choice([None, 0.0, number(rng)])
        scenarios.append(Scenario(f"sc{s}", name(rng), freq, tuple(steps)))
    return ScenarioView(tuple(scenarios), name(rng))


def random_model(rng: random.Random) -> ArchitectureModel:
    """A resolvable model; rule findings (D001, M001, ...) are expected."""
    while True:
        present = {v for v in ("logical", "process", "development", "physical", "scenarios")
                   if rng.random() < 0.75}
        if present:
            break
    if "scenarios" in present:
        present.add("logical")
    lv = random_logical(rng) if "logical" in present else None
    pv = random_process(rng) if "process" in present else None
    dv = random_development(rng) if "development" in present else None
    ph = random_physical(rng, pv) if "physical" in present else None
    sv = random_scenarios(rng, lv) if lv is not None and "scenarios" in present else None
    l2p, l2d = [], []
    if lv is not None and pv is not None:
        tasks = [t.id for _, t in pv.tasks()]
        for c in lv.classes:
            if rng.random() < 0.85:
                l2p.append(L2PEntry(c.id, tuple(rng.sample(tasks, rng.randint(1, min(3, len(tasks)))))))
    if lv is not None and dv is not None:
        mods = [(s.id, m) for s in dv.subsystems for m in s.modules]
        if mods:
            for c in lv.classes:
                if rng.random() < 0.85:
                    l2d.append(L2DEntry(c.id, tuple(rng.sample(mods, rng.randint(1, min(2, len(mods)))))))
    return ArchitectureModel(f"arch{rng.randint(0, 999)}", name(rng), lv, pv, dv, ph, sv,
                             tuple(l2p), tuple(l2d))


def random_constraints(rng: random.Random, lv: LogicalView):
    from fourview.mapper import MapperConstraints

    ids = [c.id for c in lv.classes]
    groups = tuple(frozenset(rng.sample(ids, rng.randint(1, min(3, len(ids)))))
                   for _ in range(rng.randint(0, 2)))
    stimuli = tuple((f"s{i}", rng.choice(ids)) for i in range(rng.randint(1, 3)))
    return MapperConstraints(rng.randint(1, 6), groups, stimuli)


def loadsim_model(rng: random.Random) -> ArchitectureModel:
    """A model that passes check: mapper-built process view, exact placements,
    scenario steps that follow relations (so cross-process hops have connectors)."""
    from fourview.mapper import MapperConstraints, inside_out

    lv = random_logical(rng, (2, 8))
    lv = LogicalView(lv.categories,
                     tuple(c if c.operations else replace(c, operations=("op0",))
                           for c in lv.classes),
                     lv.relations, lv.rationale)
    res = inside_out(lv, MapperConstraints(rng.randint(1, 6)))
    procs = []
    for p in res.process_view.processes:
        tasks = tuple(Task(t.id, t.name, t.kind,
                           rng.choice([None, None, 10.0, 200.0, 40.0, 125.0]))
                      for t in p.tasks)
        procs.append(Process(p.id, p.name, tasks, p.replicas))
    pv = ProcessView(tuple(procs), res.process_view.connectors)
    nodes = tuple(Node(f"n{i}", "", rng.choice([None, 100.0, 250.0]))
                  for i in range(rng.randint(1, 4)))
    links = (Link("lan", "lan", tuple(n.id for n in nodes)),) if len(nodes) > 1 else ()
    cfg = Configuration("cfg", tuple(
        Placement(p.id, tuple(rng.choice(nodes).id for _ in range(p.replicas))) for p in procs))
    ops = {c.id: c.operations for c in lv.classes}
    pairs = [(r.source, r.target) for r in lv.relations] + \
            [(r.target, r.source) for r in lv.relations] + [(c.id, c.id) for c in lv.classes]
    scenarios = []
    for s in range(rng.randint(1, 3)):
        steps = []
        for seq in range(1, rng.randint(2, 7)):
            a, b = rng.choice(pairs)
            steps.append(Step(seq, a, b, rng.choice(ops[b])))
        scenarios.append(Scenario(f"sc{s}", "", rng.choice([0.0, 0.5, 2.0, 3.7, 10.0]),
                                  tuple(steps)))
    return ArchitectureModel("load", "", lv, pv, None, PhysicalView(nodes, links, (cfg,)),
                             ScenarioView(tuple(scenarios)), res.l2p)
