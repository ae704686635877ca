"""JSON shape documents for curves and gauge bodies.

Supported documents::

    {"type": "support_fourier", "mean": 1.0, "cos": [...], "sin": [...]}
    {"type": "ellipse", "a": 2.0, "b": 1.0}
    {"type": "polygon", "vertices": [[x, y], ...]}
    {"type": "rounded_polygon", "base": <polygon document>, "radius": 0.05}
    {"type": "lp_ball", "p": 4}
"""

from __future__ import annotations

import json

from .curves import (EllipseBody, GaugeBody, LpBall, ParamCurve, PolygonBody, RoundedPolygonBody,
                     SupportBody, SupportCurve)
from .errors import BilliardError, SpecError

SHAPE_TYPES = ("support_fourier", "ellipse", "polygon", "rounded_polygon", "lp_ball")


def parse_shape(doc):
    """Build a :class:`SupportCurve` or :class:`GaugeBody` from a parsed document."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise SpecError("shape spec must be a JSON object with a 'type' field")
    kind = doc["type"]
    try:
        if kind == "support_fourier":
            return SupportCurve(float(doc.get("mean", 1.0)), doc.get("cos", []), doc.get("sin", []))
        if kind == "ellipse":
            return EllipseBody(float(doc["a"]), float(doc["b"]))
        if kind == "polygon":
            return PolygonBody(doc["vertices"])
        if kind == "rounded_polygon":
            base = parse_shape(doc["base"])
            if not isinstance(base, PolygonBody):
                raise SpecError("rounded_polygon base must be a polygon")
            return RoundedPolygonBody(base, float(doc["radius"]))
        if kind == "lp_ball":
            return LpBall(float(doc["p"]))
    except BilliardError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed {kind} spec: {exc!r}") from exc
    raise SpecError(f"unknown shape type {kind!r}; expected one of {', '.join(SHAPE_TYPES)}")


def load_shape(path):
    """Read and parse a shape document from a JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON ({exc})") from exc
    return parse_shape(doc)


def as_body(shape) -> GaugeBody:
    if isinstance(shape, GaugeBody):
        return shape
    if isinstance(shape, SupportCurve):
        return SupportBody(shape)
    raise SpecError(f"cannot use {type(shape).__name__} as a gauge body")


def as_curve(shape) -> ParamCurve:
    """Boundary parametrization: normal angle for support curves, the body's own otherwise."""
    if isinstance(shape, ParamCurve):
        return shape
    if isinstance(shape, SupportCurve):
        return shape.as_param_curve()
    if isinstance(shape, GaugeBody):
        return shape.boundary()
    raise SpecError(f"cannot use {type(shape).__name__} as a curve")
