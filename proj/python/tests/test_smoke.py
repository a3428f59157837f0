import json
import pathlib

import pytest

modelsync = pytest.importorskip("modelsync")

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def rectangle(x, y, w, h, step=4.0):
    corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h), (x, y)]
    pts = []
    for (ax, ay), (bx, by) in zip(corners, corners[1:]):
        n = int(max(abs(bx - ax), abs(by - ay)) / step)
        pts += [(ax + (bx - ax) * i / n, ay + (by - ay) * i / n) for i in range(n)]
    return pts + [corners[-1]]


def build_document():
    doc = modelsync.Document("shop")
    board = doc.apply({"kind": "add_whiteboard", "name": "Main"})["created"][0]
    order = doc.apply({"kind": "create_class", "board": board, "bounds": [100, 100, 160, 100]}, "ann", 10)["created"][0]
    item = doc.apply({"kind": "create_class", "board": board, "bounds": [400, 100, 160, 100]}, "ann", 20)["created"][0]
    doc.apply({"kind": "edit_class", "id": order, "change": {"op": "set_name", "name": "Order"}}, "ann", 30)
    doc.apply({"kind": "edit_class", "id": item, "change": {"op": "set_name", "name": "Item"}}, "bob", 40)
    doc.apply(
        {"kind": "edit_class", "id": order,
         "change": {"op": "add_attribute", "member": {"vis": "-", "name": "total", "type": "Money"}}},
        "bob", 50)
    doc.apply(
        {"kind": "create_relationship", "rel": "composition", "source": order, "target": item,
         "source_card": "1", "target_card": "1..*", "label": "contains"},
        "ann", 60)
    return doc, board, order, item


def test_document_ops_snapshot_and_export():
    doc, board, order, item = build_document()
    snap = doc.snapshot()
    names = sorted(e["name"] for e in snap["elements"])
    assert names == ["Item", "Order"]
    assert doc.integrity_problems() == []
    assert len(doc.digest()) == 64

    restored = modelsync.Document.from_snapshot(snap)
    assert restored.digest() == doc.digest()

    uml = doc.plantuml()
    assert uml.startswith("@startuml") and uml.rstrip().endswith("@enduml")
    assert 'e2 "1" *-- "1..*" e3 : contains' in uml
    assert "-total : Money" in uml


def test_failed_body_reports_error_and_leaves_document():
    doc, board, order, item = build_document()
    before = doc.digest()
    out = doc.apply(
        {"kind": "create_relationship", "rel": "inheritance", "source": order, "target": item,
         "source_card": "1", "target_card": "*"},
        "ann", 70)
    assert out["ok"] is False and out["error"]
    assert doc.digest() == before


def test_malformed_body_raises():
    doc = modelsync.Document()
    with pytest.raises(modelsync.ModelsyncError) as info:
        doc.apply({"kind": "not_a_kind"})
    assert info.value.code


def test_recognizer_class_relationship_and_sketch():
    pts = rectangle(100, 100, 160, 100)
    assert modelsync.resample(modelsync.resample(pts)) == modelsync.resample(pts)
    assert modelsync.classify(pts, [])["kind"] == "class"

    classes = [("e1", (100, 100, 160, 100)), ("e2", (400, 100, 160, 100))]
    line = modelsync.classify([(180.0, 150.0), (300.0, 150.0), (480.0, 150.0)], classes)
    assert line["kind"] == "relationship"
    assert (line["source"], line["target"]) == ("e1", "e2")

    assert modelsync.classify([(600.0, 600.0), (640.0, 610.0), (660.0, 650.0)], classes)["kind"] == "sketch"


def test_fading_endpoints_and_palette():
    assert modelsync.fade_color((200, 100, 50), 1000, 1000) == (200, 100, 50)
    assert modelsync.fade_color((200, 100, 50), 1000, 1000 + 300000) == (0, 0, 0)
    assert modelsync.fade_color((200, 100, 50), 0, 150000) == (100, 50, 25)
    palette = modelsync.default_palette()
    assert len(palette) == 16 and len(set(palette)) == 16


def test_layers_and_instruments():
    a, b = {"e1", "e2", "e3"}, {"e3", "e4"}
    assert modelsync.layer_add(a, b) == a | b
    assert modelsync.layer_subtract(a, b) == a - b
    assert modelsync.sus_score([5, 1, 5, 1, 5, 1, 5, 1, 5, 1]) == 100.0
    assert modelsync.sus_score([3] * 10) == 50.0
    assert modelsync.tlx_raw([60, 30, 30, 40, 50, 30]) == pytest.approx(40.0, abs=1e-9)
    with pytest.raises(modelsync.ModelsyncError):
        modelsync.sus_score([3] * 9)


def test_simulation_is_deterministic_and_converges():
    scenario = modelsync.random_scenario(3, 60, latency_ms=120, jitter_ms=40, duplicate=True, seed=7)
    first = modelsync.run_scenario(scenario)
    second = modelsync.run_scenario(scenario)
    assert first == second
    assert first["converged"]
    assert {b["digest"] for b in first["bots"]} == {first["server_digest"]}


def test_scenario_file_runs():
    scenario = json.loads((SCENARIOS / "cinema.json").read_text())
    report = modelsync.run_scenario(scenario)
    assert report["converged"]
    assert report["syntactic_error_count"] == 0


def test_replay_rebuilds_snapshot():
    ops = []
    bodies = [
        {"kind": "add_whiteboard", "name": "Main"},
        {"kind": "create_class", "board": "b1", "bounds": [10, 10, 80, 60]},
        {"kind": "edit_class", "id": "e2", "change": {"op": "set_name", "name": "A"}},
    ]
    for i, body in enumerate(bodies, start=1):
        ops.append(json.dumps({"seq": i, "actor": "ann", "cseq": i, "body": body, "ts": i * 10}))
    snap = modelsync.replay("\n".join(ops) + "\n", doc_id="log")
    assert snap["doc_id"] == "log"
    assert [e["name"] for e in snap["elements"]] == ["A"]
