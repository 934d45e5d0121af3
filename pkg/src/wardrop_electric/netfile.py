"""Reading and writing routing games as JSON documents.

Grammar (all keys required unless noted)::

    {
      "nodes": <int>,
      "origin": <int>,
      "destination": <int>,
      "throughput": <float>,
      "links": [
        {"id": <int>, "tail": <int>, "head": <int>,
         "delay": {"kind": "affine", "a": <float>, "b": <float>}
                | {"kind": "polynomial", "degree": <int>, "a": <float>, "b": <float>}},
        ...
      ],
      "generator": {"kind": <str>, "params": {...}}      (optional)
    }

Link ids must be ``0..E-1`` in order. A document holding only a
``generator`` entry is expanded by running that generator. The canonical
form is ``json.dumps(..., sort_keys=True, indent=2)`` plus a newline.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ParseError
from .generators import GeneratorSpec
from .netcore import DirectedNetwork, validate
from .resistor import ResistorNet
from .wardrop import AffineGame, GeneralGame, PolynomialDelay


def _delay_record(delay) -> dict:
    if delay.degree == 1:
        return {"kind": "affine", "a": float(delay.a), "b": float(delay.b)}
    return {"kind": "polynomial", "degree": int(delay.degree), "a": float(delay.a), "b": float(delay.b)}


def to_document(game, generator: GeneratorSpec | None = None) -> dict:
    net = game.network
    if isinstance(game, AffineGame):
        delays = [PolynomialDelay(a, b, 1) for a, b in zip(game.a, game.b)]
    else:
        delays = list(game.delay)
        if not all(isinstance(t, PolynomialDelay) for t in delays):
            raise ValueError("only affine and polynomial delays can be written")
    doc = {
        "nodes": net.node_count,
        "origin": net.origin,
        "destination": net.destination,
        "throughput": game.m,
        "links": [
            {"id": e, "tail": int(t), "head": int(h), "delay": _delay_record(delays[e])}
            for e, (t, h) in enumerate(net.links)
        ],
    }
    if generator is not None:
        doc["generator"] = {"kind": generator.kind, "params": dict(generator.params)}
    return doc


def serialize(game, generator: GeneratorSpec | None = None) -> str:
    return json.dumps(to_document(game, generator), sort_keys=True, indent=2) + "\n"


def game_from_resistor(rn: ResistorNet, origin: int, destination: int, m: float = 1.0) -> AffineGame:
    """Affine game with one link per resistor link (oriented low to high id)
    and slope ``1 / W_ij``; its resistor view is ``rn`` again."""
    links = rn.resistor_links
    a = np.array([1.0 / rn.weight(i, j) for i, j in links])
    net = DirectedNetwork(rn.node_count, links, origin, destination)
    return AffineGame(net, a, np.zeros(len(links)), m)


def _require(doc: dict, key: str, kind):
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    value = doc[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"field {key!r} must be an integer")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ParseError(f"field {key!r} must be a number")
    if kind in (list, dict, str) and not isinstance(value, kind):
        raise ParseError(f"field {key!r} must be a {kind.__name__}")
    return value


def _from_generator(record: dict, seed: int | None):
    kind = _require(record, "kind", str)
    params = record.get("params", {})
    if not isinstance(params, dict):
        raise ParseError("generator params must be an object")
    try:
        built = GeneratorSpec(kind, params).build(seed)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"generator {kind!r}: {exc}") from exc
    if isinstance(built, ResistorNet):
        from .generators import double_tree_roots

        i, j = double_tree_roots(params.get("depth", 2)) if kind == "double_tree" else (0, 1)
        built = game_from_resistor(built, i, j)
    return built


def from_document(doc, seed: int | None = None):
    if not isinstance(doc, dict):
        raise ParseError("network document must be a JSON object")
    if "links" not in doc and "generator" in doc:
        return _from_generator(_require(doc, "generator", dict), seed)
    n = _require(doc, "nodes", int)
    o = _require(doc, "origin", int)
    d = _require(doc, "destination", int)
    m = float(_require(doc, "throughput", float))
    records = _require(doc, "links", list)
    links, delays = [], []
    for k, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise ParseError(f"link record {k} must be an object")
        if _require(rec, "id", int) != k:
            raise ParseError(f"link ids must run 0..E-1 in order (record {k} has id {rec['id']})")
        links.append((_require(rec, "tail", int), _require(rec, "head", int)))
        delay = _require(rec, "delay", dict)
        kind = _require(delay, "kind", str)
        a = float(_require(delay, "a", float))
        b = float(_require(delay, "b", float))
        if kind == "affine":
            degree = 1
        elif kind == "polynomial":
            degree = _require(delay, "degree", int)
            if degree < 1:
                raise ParseError(f"link {k}: polynomial degree must be at least 1")
        else:
            raise ParseError(f"link {k}: unknown delay kind {kind!r}")
        delays.append(PolynomialDelay(a, b, degree))
    try:
        net = DirectedNetwork(n, links, o, d)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    problems = validate(net)
    if problems:
        raise ParseError("; ".join(problems))
    try:
        if all(t.degree == 1 for t in delays):
            return AffineGame(net, [t.a for t in delays], [t.b for t in delays], m)
        return GeneralGame(net, delays, m)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse(text: str, seed: int | None = None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_document(doc, seed)


def load(path: str, seed: int | None = None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse(text, seed)
