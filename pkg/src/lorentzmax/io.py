"""JSON formats for spaces, functions and sequence plans.

Counts are decimal strings, weights log2 floats.  Each weight also carries
``weight_exact`` = [mantissa, exponent] so a round trip is lossless.  Combined
spaces store their components and are rebuilt on load, which restores the
provenance needed by the decomposition checks.
"""
from __future__ import annotations

import json
import math
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from .combiner import CombinedSpace, combine
from .errors import LorentzMaxError
from .extreal import ExtReal
from .generators import CertEntry, SequencePlan
from .layout import Base, IntervalLayout, Mark
from .lorentz import CellFunction
from .space import BallProfile, Cell, CellularSpace, DenseSpace


class FormatError(LorentzMaxError, ValueError):
    pass


@contextmanager
def _long_ints():
    """Counts of the second-type spaces run to thousands of digits."""
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


def _w_out(w: ExtReal) -> dict:
    return {"log2_weight": w.log2(), "weight_exact": [w.m, w.e]}


def _w_in(obj: dict) -> ExtReal:
    if "weight_exact" in obj:
        m, e = obj["weight_exact"]
        return ExtReal.raw(float(m), int(e))
    return ExtReal.from_log2(float(obj["log2_weight"]))


def _num(x) -> str:
    return str(x) if not isinstance(x, float) else repr(x)


def _json_safe(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, (tuple, list)):
        return [_json_safe(x) for x in v]
    if isinstance(v, int) and v.bit_length() > 53:
        return str(v)
    return v


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------
def _space_to_dict(space) -> dict:
    if isinstance(space, DenseSpace):
        return {
            "kind": "dense",
            "points": [
                {"id": pid, **_w_out(ExtReal(w)), "tags": list(space.tags[i]) if space.tags else []}
                for i, (pid, w) in enumerate(zip(space.ids, space.weights))
            ],
            "matrix": np.asarray(space.matrix, dtype=float).tolist(),
            "params": {k: _json_safe(v) for k, v in space.meta.items()},
        }
    if isinstance(space, CombinedSpace):
        return {"kind": "combined", "components": [_space_to_dict(c) for c in space.provenance.components]}
    out = {
        "kind": "cellular",
        "family": space.kind,
        "cells": [{"id": c.id, "count": str(c.count), **_w_out(c.weight), "tags": list(c.tags)} for c in space.cells],
        "profiles": [
            {
                "cell": c.id,
                "balls": [
                    {"radius": rad, "members": {d: str(k) for d, k in mem.items()}}
                    for rad, mem in zip(space.profiles[c.id].radii, space.profiles[c.id].members)
                ],
            }
            for c in space.cells
        ],
        "splits": [{"cell": cid, "rule": rule} for cid, rule in sorted(space.splits.items())],
    }
    params = {k: _json_safe(v) for k, v in space.meta.items() if k not in ("kind", "plan")}
    if params:
        out["params"] = params
    if "plan" in space.meta:
        out["plan"] = _plan_to_dict(space.meta["plan"])
    if space.layout is not None:
        out["layout"] = _layout_to_dict(space.layout)
    return out


def _space_from_dict(obj: dict):
    if not isinstance(obj, dict):
        raise FormatError("a space file holds a JSON object")
    kind = obj.get("kind")
    try:
        if kind == "dense":
            pts = obj["points"]
            return DenseSpace(
                ids=tuple(p["id"] for p in pts),
                weights=tuple(_w_in(p) for p in pts),
                matrix=np.array(obj["matrix"], dtype=np.float64),
                tags=tuple(tuple(p.get("tags", ())) for p in pts),
                meta=dict(obj.get("params", {})),
            )
        if kind == "combined":
            return combine([_space_from_dict(c) for c in obj["components"]])
        if kind == "cellular":
            cells = tuple(Cell(c["id"], int(c["count"]), _w_in(c), tuple(c.get("tags", ()))) for c in obj["cells"])
            profiles = {}
            for p in obj["profiles"]:
                balls = p["balls"]
                profiles[p["cell"]] = BallProfile(
                    p["cell"],
                    tuple(float(b["radius"]) for b in balls),
                    tuple({d: int(k) for d, k in b["members"].items()} for b in balls),
                )
            splits = {s["cell"]: s["rule"] for s in obj.get("splits", [])}
            meta = {"kind": obj.get("family", "cellular")}
            meta.update(obj.get("params", {}))
            if "plan" in obj:
                meta["plan"] = _plan_from_dict(obj["plan"])
            layout = _layout_from_dict(obj["layout"]) if "layout" in obj else None
            return CellularSpace(cells, profiles, splits, meta, layout)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed space file: {exc}") from None
    raise FormatError(f"unknown space kind {kind!r}")


def _layout_to_dict(lay: IntervalLayout) -> dict:
    return {
        "bases": [
            {"id": b.id, "count": str(b.count), **_w_out(b.weight), "tags": list(b.tags), "splittable": b.splittable}
            for b in lay.bases
        ],
        "links": sorted([lo, up] for lo, up in lay.links),
        "near": lay.near,
        "far": lay.far,
        "marks": [{"label": m.label, "base": m.base, "ranges": [[str(a), str(b)] for a, b in m.ranges]} for m in lay.marks],
        "classes": {
            cid: {"base": bid, "ranges": [[str(a), str(b)] for a, b in rng]} for cid, (bid, rng) in lay.classes.items()
        },
    }


def _layout_from_dict(obj: dict) -> IntervalLayout:
    bases = tuple(
        Base(b["id"], int(b["count"]), _w_in(b), tuple(b.get("tags", ())), bool(b.get("splittable", False)))
        for b in obj["bases"]
    )
    marks = tuple(
        Mark(m["label"], m["base"], tuple((int(a), int(b)) for a, b in m["ranges"])) for m in obj.get("marks", [])
    )
    classes = {
        cid: (c["base"], tuple((int(a), int(b)) for a, b in c["ranges"])) for cid, c in obj.get("classes", {}).items()
    }
    links = frozenset(tuple(x) for x in obj["links"])
    return IntervalLayout(bases, links, float(obj["near"]), float(obj["far"]), marks, classes)


def load_space(path):
    with open(path) as fh:
        return space_from_dict(json.load(fh))


def save_space(space, path) -> None:
    with open(path, "w") as fh:
        json.dump(space_to_dict(space), fh, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# functions
# ---------------------------------------------------------------------------
def function_to_dict(f: CellFunction) -> dict:
    return {"values": {k: ("-inf" if v.is_zero() else v.log2()) for k, v in f.values.items()}}


def function_from_dict(obj: dict) -> CellFunction:
    try:
        vals = obj["values"]
        return CellFunction({k: ExtReal(0.0) if v == "-inf" else ExtReal.from_log2(float(v)) for k, v in vals.items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed function file: {exc}") from None


def load_function(path) -> CellFunction:
    with open(path) as fh:
        return function_from_dict(json.load(fh))


def save_function(f: CellFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(function_to_dict(f), fh, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------
def _plan_to_dict(plan: SequencePlan) -> dict:
    return {
        "kind": plan.kind,
        "l": plan.l,
        "m": [str(x) for x in plan.m],
        "h": [str(x) for x in plan.h],
        "alpha": [str(x) for x in plan.alpha],
        "beta": [str(x) for x in plan.beta],
        "alpha_scalar": str(plan.alpha_scalar),
        "params": [_num(x) if not (isinstance(x, float) and math.isinf(x)) else "inf" for x in plan.params],
        "certificate": [{"id": c.id, "holds": c.holds, "witness": c.witness} for c in plan.certificate],
    }


def _plan_from_dict(obj: dict) -> SequencePlan:
    def ints(key):
        return tuple(int(x) for x in obj.get(key, []))

    params = tuple(_param_in(x) for x in obj.get("params", []))
    cert = tuple(CertEntry(c["id"], bool(c["holds"]), c["witness"]) for c in obj.get("certificate", []))
    return SequencePlan(
        obj["kind"], int(obj["l"]), ints("m"), ints("h"), ints("alpha"), ints("beta"),
        int(obj.get("alpha_scalar", 0)), params, cert,
    )


def _param_in(x):
    if x == "inf":
        return math.inf
    v = Fraction(x)
    return int(v) if v.denominator == 1 and "." not in str(x) else float(v)


def space_to_dict(space) -> dict:
    with _long_ints():
        return _space_to_dict(space)


def space_from_dict(obj: dict):
    with _long_ints():
        return _space_from_dict(obj)


def plan_to_dict(plan: SequencePlan) -> dict:
    with _long_ints():
        return _plan_to_dict(plan)


def plan_from_dict(obj: dict) -> SequencePlan:
    with _long_ints():
        return _plan_from_dict(obj)
