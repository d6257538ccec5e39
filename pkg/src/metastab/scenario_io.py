"""Scenario files: JSON documents describing one iteration setup.

Schema (unknown keys are rejected at every level)::

    {
      "operator": {"kind": "indicator_box", "lo": [0], "hi": [1]},
      "x0": [3],
      "alpha": {"kind": "harmonic_offset", "c": 1} | {"kind": "table", "values": [...]},
      "beta": {"kind": "linear", "slope": 1, "offset": 1} | {"kind": "table", "values": [...]},
      "errors": {"kind": "zero"}
              | {"kind": "geometric", "c": 1, "rho": 0.5, "direction": [1]}
              | {"kind": "table", "points": [[...], ...]},
      "ell": 1,
      "witnesses": {"a": "id", "A": "expe:1", "Aprime": "bilinear:1",
                    "b": "affine:1,1", "B": "id", "E": "const:0"},
      "overrides": {"D_seq": 64, "budget_bits": 1000000, "horizon": 100000}
    }

Only ``operator`` and ``x0`` are required.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

from . import operators as ops
from .errors import DimensionMismatch, InvalidScenario, NonFiniteNumeric
from .iteration import HORIZON_CAP, Scenario
from .rates import RateWitnessBundle, parse_binatfun, parse_natfun
from .sequences import (
    ErrorTable, Geometric, HarmonicOffset, LinearGrowth, SequenceSpec, Table, ZeroErrors,
)

TOP_KEYS = {"operator", "x0", "alpha", "beta", "errors", "ell", "witnesses", "overrides"}
WITNESS_KEYS = ("a", "A", "Aprime", "b", "B", "E")
OVERRIDE_KEYS = {"D_seq", "budget_bits", "horizon"}


def _keys(d, allowed, where):
    if not isinstance(d, dict):
        raise InvalidScenario(f"{where} must be an object")
    extra = set(d) - set(allowed)
    if extra:
        raise InvalidScenario(f"unknown keys in {where}: {sorted(extra)}")


def _kind(d, where):
    if not isinstance(d, dict) or "kind" not in d:
        raise InvalidScenario(f"{where} must be an object with a 'kind'")
    return d["kind"]


def parse_alpha(d):
    kind = _kind(d, "alpha")
    if kind == "harmonic_offset":
        _keys(d, {"kind", "c"}, "alpha")
        return HarmonicOffset(d.get("c", 1))
    if kind == "table":
        _keys(d, {"kind", "values"}, "alpha")
        return Table(tuple(float(v) for v in d["values"]))
    raise InvalidScenario(f"unknown alpha kind {kind!r}")


def parse_beta(d):
    kind = _kind(d, "beta")
    if kind == "linear":
        _keys(d, {"kind", "slope", "offset"}, "beta")
        return LinearGrowth(float(d.get("slope", 1.0)), float(d.get("offset", 1.0)))
    if kind == "table":
        _keys(d, {"kind", "values"}, "beta")
        return Table(tuple(float(v) for v in d["values"]))
    raise InvalidScenario(f"unknown beta kind {kind!r}")


def parse_errors(d):
    kind = _kind(d, "errors")
    if kind == "zero":
        _keys(d, {"kind"}, "errors")
        return ZeroErrors()
    if kind == "geometric":
        _keys(d, {"kind", "c", "rho", "direction"}, "errors")
        return Geometric(float(d["c"]), float(d["rho"]), tuple(float(v) for v in d["direction"]))
    if kind == "table":
        _keys(d, {"kind", "points"}, "errors")
        return ErrorTable(tuple(tuple(float(v) for v in p) for p in d["points"]))
    raise InvalidScenario(f"unknown errors kind {kind!r}")


def parse_witnesses(d) -> RateWitnessBundle:
    _keys(d, WITNESS_KEYS, "witnesses")
    out = {}
    for key, text in d.items():
        if not isinstance(text, str):
            raise InvalidScenario(f"witness {key} must be a spec string")
        try:
            out[key] = parse_binatfun(text) if key == "Aprime" else parse_natfun(text)
        except ValueError as exc:
            raise InvalidScenario(f"witness {key}: {exc}") from None
    return RateWitnessBundle(**out)


def scenario_from_dict(doc: dict) -> Scenario:
    _keys(doc, TOP_KEYS, "scenario")
    for req in ("operator", "x0"):
        if req not in doc:
            raise InvalidScenario(f"scenario is missing {req!r}")
    try:
        op = ops.from_dict(doc["operator"])
        seq = SequenceSpec(
            alpha=parse_alpha(doc.get("alpha", {"kind": "harmonic_offset", "c": 1})),
            beta=parse_beta(doc.get("beta", {"kind": "linear", "slope": 1, "offset": 1})),
            errors=parse_errors(doc.get("errors", {"kind": "zero"})),
        )
        wit = parse_witnesses(doc["witnesses"]) if "witnesses" in doc else None
        ov = doc.get("overrides", {})
        _keys(ov, OVERRIDE_KEYS, "overrides")
        ell = doc.get("ell", 1)
        if isinstance(ell, bool) or not isinstance(ell, int):
            raise InvalidScenario("ell must be an integer")
        return Scenario(
            operator=op, x0=doc["x0"], seq=seq, witnesses=wit, ell=ell,
            D_seq=ov.get("D_seq"), budget_bits=ov.get("budget_bits"),
            horizon=int(ov.get("horizon", HORIZON_CAP)),
        )
    except (InvalidScenario, DimensionMismatch, NonFiniteNumeric):
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScenario(f"bad scenario field: {exc}") from None


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read and validate a scenario file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InvalidScenario(f"cannot read scenario {p}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"scenario {p} is not valid JSON: {exc}") from None
    return scenario_from_dict(doc)


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {
        "operator": sc.operator.to_dict(),
        "x0": sc.x0.tolist(),
        "alpha": sc.seq.alpha.to_dict(),
        "beta": sc.seq.beta.to_dict(),
        "errors": sc.seq.errors.to_dict(),
        "ell": sc.ell,
    }
    if sc.witnesses is not None:
        doc["witnesses"] = sc.witnesses.specs()
    ov = {"D_seq": sc.D_seq, "budget_bits": sc.budget_bits, "horizon": sc.horizon}
    doc["overrides"] = {k: v for k, v in ov.items() if v is not None}
    return doc
