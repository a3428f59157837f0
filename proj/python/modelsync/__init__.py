"""Python access to the modelsync core: recognizer, history fading, layers,
documents, replay and the simulation harness."""

import json

from . import _core
from ._core import (
    ModelsyncError,
    classify,
    default_palette,
    fade_color,
    layer_add,
    layer_subtract,
    resample,
    sus_score,
    tlx_raw,
)

__all__ = [
    "Document",
    "ModelsyncError",
    "classify",
    "default_palette",
    "fade_color",
    "layer_add",
    "layer_subtract",
    "random_scenario",
    "replay",
    "resample",
    "run_scenario",
    "sus_score",
    "tlx_raw",
]


class Document:
    """A local model document driven by wire-format op bodies (dicts)."""

    def __init__(self, doc_id="doc", _native=None):
        self._doc = _native if _native is not None else _core.Document(doc_id)

    @classmethod
    def from_snapshot(cls, snapshot):
        return cls(_native=_core.Document.from_json(json.dumps(snapshot)))

    @property
    def doc_id(self):
        return self._doc.doc_id

    def apply(self, body, actor="local", now=0):
        return json.loads(self._doc.apply(json.dumps(body), actor, now))

    def snapshot(self):
        return json.loads(self._doc.to_json())

    def digest(self):
        return self._doc.digest()

    def plantuml(self):
        return self._doc.plantuml()

    def integrity_problems(self):
        return self._doc.integrity_problems()


def replay(oplog, doc_id="doc"):
    """Rebuilds a snapshot from NDJSON op-log text."""
    return json.loads(_core.replay(oplog, doc_id))


def random_scenario(clients, ops, latency_ms=250, jitter_ms=100, duplicate=False, seed=42):
    return json.loads(_core.random_scenario(clients, ops, latency_ms, jitter_ms, duplicate, seed))


def run_scenario(scenario):
    """Runs a scenario (dict) in the deterministic harness; returns the report."""
    return json.loads(_core.run_scenario(json.dumps(scenario)))
