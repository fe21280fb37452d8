import dataclasses
import random

import pytest

from fourview import FourViewError, to_dot
from fourview.model import LogicalView

import dotcheck
from generators import random_model

VIEWS = ("logical", "process", "development", "physical")


def test_pabx_logical(pabx):
    text = to_dot(pabx, "logical")
    g = dotcheck.read(text)
    ellipses = [n for n, a in g.nodes.items() if a.get("shape") == "ellipse"]
    assert sorted(ellipses) == sorted(c.id for c in pabx.logical.classes)
    [usage] = [e for e in g.edges if e[:2] == ("conversation", "translation_services")]
    assert usage[2] == {"style": "dashed"}
    assert g.clusters == ["cluster_telephony"]
    assert g.nodes["translation_services"]["peripheries"] == "2"


def test_empty_logical_view(pabx):
    m = dataclasses.replace(pabx, logical=LogicalView())
    text = to_dot(m, "logical")
    lines = text.splitlines()
    assert lines[0].startswith("// legend:")
    assert lines[1:] == ["digraph logical {}"]
    dotcheck.read(text)


def test_atc_layers(atc):
    g = dotcheck.read(to_dot(atc, "development"))
    assert g.attrs["rankdir"] == "BT"
    layers = [c for c in g.clusters if c.startswith("cluster_layer_")]
    assert layers == [f"cluster_layer_{i}" for i in range(1, 6)]
    chain = [(a, b) for a, b, attrs in g.edges if attrs.get("style") == "invis"]
    assert chain == [(f"layer_{i}", f"layer_{i + 1}") for i in range(1, 5)]
    boxes = [n for n, a in g.nodes.items() if a.get("shape") == "box3d"]
    assert len(boxes) == 12
    layer_of = {s.id: s.layer for s in atc.development.subsystems}
    for i in range(1, 6):
        members = g.cluster_members[f"cluster_layer_{i}"]
        assert sorted(m for m in members if m in layer_of) == \
            sorted(s for s, n in layer_of.items() if n == i)


def test_pabx_process(pabx):
    g = dotcheck.read(to_dot(pabx, "process"))
    assert g.nodes["low_cycle"]["style"] == "dashed"
    assert g.nodes["main_controller"]["shape"] == "box"
    assert "style" not in g.nodes["main_controller"]
    assert {(a, b): attrs["label"] for a, b, attrs in g.edges}[("low_cycle", "high_cycle")] \
        == "shared_memory"
    assert len(g.clusters) == 4


def test_pabx_physical(pabx):
    g = dotcheck.read(to_dot(pabx, "physical"))
    houses = [n for n, a in g.nodes.items() if a.get("shape") == "house"]
    assert sorted(houses) == ["c1", "c2", "f1", "f2", "k1"]
    assert g.nodes["link_lan1"]["shape"] == "point"
    assert sum(1 for a, _, _ in g.edges if a == "link_lan1") == 5


def test_scenario_edges(pabx):
    g = dotcheck.read(to_dot(pabx, "scenario", "off_hook"))
    labels = [attrs["label"] for _, _, attrs in g.edges]
    assert labels == ["1: wake_up", "2: emit_dial_tone", "3: transmit_digits",
                      "4: analyze_digits", "5: open"]


def test_errors(pabx):
    with pytest.raises(FourViewError) as exc:
        to_dot(dataclasses.replace(pabx, physical=None), "physical")
    assert exc.value.code == "E_NOVIEW"
    with pytest.raises(FourViewError):
        to_dot(pabx, "scenario", "nope")
    with pytest.raises(ValueError):
        to_dot(pabx, "scenario")


def elements(model, view):
    if view == "logical":
        return [c.id for c in model.logical.classes]
    if view == "process":
        return [t.id for _, t in model.process.tasks()]
    if view == "development":
        return [s.id for s in model.development.subsystems]
    return [n.id for n in model.physical.nodes]


def test_random_models_render_valid_dot():
    rng = random.Random(99)
    for _ in range(300):
        m = random_model(rng)
        for view in VIEWS:
            if getattr(m, view) is None:
                continue
            text = to_dot(m, view)
            assert text == to_dot(m, view)
            g = dotcheck.read(text)
            ids = elements(m, view)
            for i in ids:
                assert g.node_decls.count(i) == 1, (view, i)
        if m.scenarios:
            for s in m.scenarios.scenarios:
                g = dotcheck.read(to_dot(m, "scenario", s.id))
                assert len(g.edges) == len(s.steps)
