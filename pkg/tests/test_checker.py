import dataclasses
import random

import pytest

from fourview import CheckOptions, FourViewError, check, trace, view_presence
from fourview.checker import RULE_VIEWS, count, rules_requiring
from fourview.model import (
    Connector,
    DevDependency,
    L2PEntry,
    LayerDef,
    Scenario,
    ScenarioView,
    Step,
)

from generators import random_model


def rules(diags, severity=None):
    return [d.rule for d in diags if severity is None or d.severity == severity]


def test_pabx_is_clean(pabx):
    assert check(pabx) == []


def test_atc_has_no_errors(atc):
    diags = check(atc)
    assert count(diags)["error"] == 0
    assert count(diags)["warning"] == 0
    assert {d.rule for d in diags} <= {"T001"}


def inject(model, src, dst):
    dv = model.development
    return dataclasses.replace(model, development=dataclasses.replace(
        dv, dependencies=dv.dependencies + (DevDependency(src, dst),)))


def test_upward_dependency_is_one_d001(atc):
    layer = {s.id: s.layer for s in atc.development.subsystems}
    assert (layer["persistence"], layer["hmi"]) == (2, 5)
    diags = check(inject(atc, "persistence", "hmi"))
    assert rules(diags, "error") == ["D001"]
    assert "persistence" in diags[0].message and "hmi" in diags[0].message


def test_downward_and_sideways_allowed(atc):
    assert rules(check(inject(atc, "hmi", "persistence")), "error") == []
    assert rules(check(inject(atc, "persistence", "basic_types")), "error") == []


def squash_layers(model, top):
    dv = model.development
    return dataclasses.replace(model, development=dataclasses.replace(
        dv,
        layers=tuple(l for l in dv.layers if l.number <= top),
        subsystems=tuple(dataclasses.replace(s, layer=min(s.layer, top))
                         for s in dv.subsystems)))


def test_three_layers_is_one_d002(atc):
    diags = check(squash_layers(atc, 3))
    assert [d for d in rules(diags) if d != "T001" and d != "D004"] == ["D002"]
    assert diags[[d.rule for d in diags].index("D002")].severity == "warning"


def test_seven_layers_is_d002(atc):
    dv = atc.development
    layers = dv.layers + (LayerDef(6, "six"), LayerDef(7, "seven"))
    m = dataclasses.replace(atc, development=dataclasses.replace(dv, layers=layers))
    assert rules(check(m)).count("D002") == 1


def test_ksloc_out_of_range(atc):
    dv = atc.development
    subs = tuple(dataclasses.replace(s, ksloc=40.0) if s.id == "hmi" else s
                 for s in dv.subsystems)
    m = dataclasses.replace(atc, development=dataclasses.replace(dv, subsystems=subs))
    assert rules(check(m), "warning") == ["D003"]


def test_same_layer_cycle_is_info(atc):
    m = inject(inject(atc, "flight_mgmt", "sector_mgmt"), "sector_mgmt", "flight_mgmt")
    diags = check(m)
    assert count(diags)["error"] == 0
    assert "D004" in rules(diags, "info")


def add_connector(model, kind, a, b):
    pv = model.process
    return dataclasses.replace(model, process=dataclasses.replace(
        pv, connectors=pv.connectors + (Connector(kind, a, b),)))


def test_shared_memory_across_processes_is_p001(pabx):
    diags = check(add_connector(pabx, "shared_memory", "terminal_task", "conversation_task"))
    assert rules(diags, "error") == ["P001"]


def test_shared_memory_inside_controller_is_fine(pabx):
    assert any(c.kind == "shared_memory" for c in pabx.process.connectors)
    assert check(add_connector(pabx, "shared_memory", "low_cycle", "main_controller")) == []


def test_major_task_with_only_local_connectors_is_p002(pabx):
    pv = pabx.process
    conns = tuple(c for c in pv.connectors if "main_controller" not in (c.source, c.target))
    conns += (Connector("shared_memory", "high_cycle", "main_controller"),)
    m = dataclasses.replace(pabx, process=dataclasses.replace(pv, connectors=conns))
    assert "P002" in rules(check(m), "warning")


def test_missing_l2p_is_m001(pabx):
    m = dataclasses.replace(pabx, l2p=tuple(e for e in pabx.l2p if e.cls != "terminal"))
    assert "M001" in rules(check(m), "error")


def test_missing_l2d_is_m004(pabx):
    m = dataclasses.replace(pabx, l2d=tuple(e for e in pabx.l2d if e.cls != "terminal"))
    assert rules(check(m)) == ["M004"]


def test_subordinate_off_master_is_m002(flight):
    from fourview import MapperConstraints, inside_out
    res = inside_out(flight.logical, MapperConstraints())
    m = dataclasses.replace(flight, process=res.process_view, l2p=res.l2p)
    assert rules(check(m), "error") == []
    l2p = tuple(L2PEntry("clearance", ("server_airspace",)) if e.cls == "clearance" else e
                for e in res.l2p)
    assert "M002" in rules(check(dataclasses.replace(m, l2p=l2p)), "error")


def test_active_sharing_agent_is_m003(pabx):
    moved = {"conversation": ("terminal_task",), "terminal": ("terminal_task", "main_controller")}
    l2p = tuple(L2PEntry(e.cls, moved.get(e.cls, e.tasks)) for e in pabx.l2p)
    diags = check(dataclasses.replace(pabx, l2p=l2p))
    assert sorted(d.message for d in diags if d.rule == "M003") == [
        "active class 'conversation' has no agent task of its own",
        "active class 'terminal' has no agent task of its own"]


def test_placement_errors_are_ph01(pabx):
    ph = pabx.physical
    small = ph.configuration("small")
    bad = dataclasses.replace(small, placement=tuple(
        dataclasses.replace(p, nodes=("c1",)) if p.process == "controller_process" else p
        for p in small.placement if p.process != "services_process"))
    m = dataclasses.replace(pabx, physical=dataclasses.replace(ph, configurations=(bad,)))
    assert rules(check(m)) == ["PH01", "PH01"]


def test_category_mismatch_is_l001(pabx):
    lv = pabx.logical
    classes = tuple(dataclasses.replace(c, category=None) if c.id == "terminal" else c
                    for c in lv.classes)
    m = dataclasses.replace(pabx, logical=dataclasses.replace(lv, classes=classes))
    assert rules(check(m)) == ["L001"]


def test_trace_off_hook(pabx):
    tr, diags = trace(pabx, "off_hook")
    assert diags == []
    assert len(tr.hops) == 5
    first = tr.hops[0]
    assert (first.from_task, first.to_task) == ("main_controller", "terminal_task")
    assert first.crossing == "cross_process"
    assert first.connector.kind == "message"
    assert [h.crossing for h in tr.hops] == [
        "cross_process", "cross_process", "cross_process", "same_task", "cross_process"]


def test_trace_unknown_scenario(pabx):
    with pytest.raises(FourViewError) as exc:
        trace(pabx, "nope")
    assert exc.value.code == "E_NOSCENARIO"


def with_steps(model, *steps, sid="extra"):
    sc = Scenario(sid, "", 1.0, tuple(Step(i, *s) for i, s in enumerate(steps, 1)))
    sv = model.scenarios
    return dataclasses.replace(model, scenarios=ScenarioView(sv.scenarios + (sc,)))


def test_missing_operation_is_s001(pabx):
    m = with_steps(pabx, ("controller", "terminal", "dial"))
    diags = check(m)
    assert rules(diags) == ["S001"]
    assert "'dial'" in diags[0].message
    _, tdiags = trace(m, "extra")
    assert rules(tdiags) == ["S001"]


def test_missing_class_is_s001(pabx):
    assert rules(check(with_steps(pabx, ("ghost", "terminal", "wake_up")))) == ["S001"]


def test_cross_process_without_connector_is_s002(pabx):
    # controller and conversation only share memory with nobody
    m = with_steps(pabx, ("controller", "conversation", "open"))
    assert rules(check(m)) == ["S002"]
    tr, _ = trace(m, "extra")
    assert tr.hops[0].crossing == "cross_process" and tr.hops[0].connector is None


def test_rpc_connector_used_and_hint_respected(pabx):
    m = with_steps(pabx, ("conversation", "translation_services", "route"))
    tr, diags = trace(m, "extra")
    assert diags == [] and tr.hops[0].connector.kind == "rpc"
    both = add_connector(m, "message", "conversation_task", "services_task")
    tr, _ = trace(both, "extra")
    assert tr.hops[0].connector.kind == "message"  # lowest kind in enum order
    hinted = with_steps(both, ("conversation", "translation_services", "route", "rpc"),
                        sid="hinted")
    tr, _ = trace(hinted, "hinted")
    assert tr.hops[0].connector.kind == "rpc"


def test_unmapped_hop(pabx):
    m = dataclasses.replace(pabx, l2p=tuple(e for e in pabx.l2p if e.cls != "terminal"))
    tr, _ = trace(m, "off_hook")
    assert not tr.hops[0].mapped and tr.hops[0].to_task is None


def test_sketch_mode_downgrades(pabx):
    m = with_steps(dataclasses.replace(pabx, l2d=()), ("controller", "terminal", "dial"),
                   ("controller", "conversation", "open"))
    strict = check(m)
    sketch = check(m, CheckOptions(mode="sketch"))
    assert {d.rule for d in strict if d.severity == "error"} == {"S001", "S002", "M004"}
    assert count(sketch)["error"] == 0
    assert sorted(rules(sketch)) == sorted(rules(strict))


def test_warnings_as_errors_and_disable(atc):
    m = squash_layers(atc, 3)
    assert "D002" in rules(check(m, CheckOptions(warnings_as_errors=True)), "error")
    assert "D002" not in rules(check(m, CheckOptions(disabled_rules={"D002"})))


def test_absent_views_yield_t001(pabx):
    m = dataclasses.replace(pabx, physical=None, development=None, l2d=())
    infos = [d for d in check(m) if d.rule == "T001"]
    assert [d.message.split()[0] for d in infos] == ["development", "physical"]
    assert all(d.severity == "info" for d in infos)


def test_unresolved_model_returns_resolution_errors_only(pabx):
    m = dataclasses.replace(pabx, l2p=pabx.l2p + (L2PEntry("ghost", ("terminal_task",)),))
    assert rules(check(m)) == ["E_REF"]


# -- properties over seeded random models ------------------------------------


def models(n, seed):
    rng = random.Random(seed)
    return [random_model(rng) for _ in range(n)]


def test_rule_locality():
    dev_rules = rules_requiring("development")
    for m in models(300, 1):
        if m.development is None or len(view_presence(m)) == 1:
            continue
        before = check(m)
        after = check(dataclasses.replace(m, development=None, l2d=()))
        kept = [d for d in before if d.rule not in dev_rules]
        added = [d for d in after if d not in kept]
        assert [d for d in after if d in kept] == kept
        assert [(d.rule, d.message.split()[0]) for d in added] == [("T001", "development")]


def test_d001_matches_brute_force():
    for m in models(400, 2):
        if m.development is None:
            continue
        layer = {s.id: s.layer for s in m.development.subsystems}
        expected = sorted((d.source, d.target) for d in m.development.dependencies
                          if layer[d.target] > layer[d.source])
        found = sorted(tuple(x.split("'")[1::2][:2]) for x in
                       (d.message for d in check(m) if d.rule == "D001"))
        assert found == expected


def test_m001_monotone():
    rng = random.Random(3)
    for m in models(300, 3):
        if m.logical is None or m.process is None:
            continue
        before = rules(check(m)).count("M001")
        unmapped = [c.id for c in m.logical.classes if c.id not in m.l2p_map()]
        if not unmapped:
            continue
        task = rng.choice([t.id for _, t in m.process.tasks()])
        grown = dataclasses.replace(m, l2p=m.l2p + (L2PEntry(rng.choice(unmapped), (task,)),))
        assert rules(check(grown)).count("M001") <= before - 1


def test_check_deterministic():
    for m in models(200, 4):
        for opts in (CheckOptions(), CheckOptions(mode="sketch", warnings_as_errors=True)):
            a, b = check(m, opts), check(m, opts)
            assert a == b
            assert [d.sort_key() for d in a] == sorted(d.sort_key() for d in a)


def test_rule_views_cover_catalog():
    from fourview.model import RULES
    assert set(RULE_VIEWS) == {r for r in RULES if not r.startswith("E_") and r != "T001"}
