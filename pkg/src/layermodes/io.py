"""Profile documents and report serialization.

A profile document is YAML (JSON is accepted as a subset)::

    kind: layered            # or "sampled"
    H: 1.0                   # optional, checked against the last breakpoint
    breakpoints: [0, 0.5, 1]
    values: [1, 4]
    cross_section:           # optional, default: interval of length pi
      lengths: [3.141592653589793]
    well:                    # optional, enables guided classification
      c1: 4.0

A sampled document replaces ``breakpoints``/``values`` with ``grid`` and
``samples`` and may add ``dsamples``, ``ddsamples`` and ``interpolation``
(``piecewise-linear`` or ``left-constant``).

Validation errors are raised as :class:`SchemaError` with a field path
such as ``values/2``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence, Union

import jsonschema
import numpy as np
import yaml

from .cross_section import CrossSection
from .errors import SchemaError
from .profile import INTERPOLATIONS, LayeredProfile, SampledProfile

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NUMS = {"type": "array", "items": _NUM}
_POSS = {"type": "array", "items": _POS}

PROFILE_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["layered", "sampled"]},
        "H": _POS,
        "breakpoints": dict(_NUMS, minItems=2),
        "values": dict(_POSS, minItems=1),
        "grid": dict(_NUMS, minItems=2),
        "samples": dict(_POSS, minItems=2),
        "dsamples": _NUMS,
        "ddsamples": _NUMS,
        "interpolation": {"enum": list(INTERPOLATIONS) + ["linear"]},
        "cross_section": {
            "type": "object",
            "required": ["lengths"],
            "properties": {"lengths": dict(_POSS, minItems=1)},
            "additionalProperties": False,
        },
        "well": {
            "type": "object",
            "required": ["c1"],
            "properties": {"c1": _POS},
            "additionalProperties": False,
        },
        "name": {"type": "string"},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "layered"}}},
         "then": {"required": ["breakpoints", "values"]}},
        {"if": {"properties": {"kind": {"const": "sampled"}}},
         "then": {"required": ["grid", "samples"]}},
    ],
}


@dataclass(frozen=True)
class ProfileDocument:
    profile: Union[LayeredProfile, SampledProfile]
    cross_section: CrossSection
    c1: Optional[float] = None
    name: Optional[str] = None


def _path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = err.message.split("'")[1] if "'" in err.message else ""
        parts.append(missing)
    return "/".join(parts) or "<root>"


def validate_document(doc: Any) -> None:
    """Raise :class:`SchemaError` naming the first offending field."""
    validator = jsonschema.Draft202012Validator(PROFILE_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise SchemaError(e.message, _path(e))


def profile_from_document(doc: dict) -> ProfileDocument:
    validate_document(doc)
    if doc["kind"] == "layered":
        prof = LayeredProfile(doc["breakpoints"], doc["values"])
    else:
        prof = SampledProfile(doc["grid"], doc["samples"], doc.get("interpolation", "piecewise-linear"),
                              doc.get("dsamples"), doc.get("ddsamples"))
    if "H" in doc and not math.isclose(doc["H"], prof.H, rel_tol=1e-12, abs_tol=0.0):
        raise SchemaError(f"H = {doc['H']} disagrees with the last breakpoint {prof.H}", "H")
    cs = CrossSection(tuple(doc["cross_section"]["lengths"])) if "cross_section" in doc else \
        CrossSection.interval(math.pi)
    c1 = doc["well"]["c1"] if "well" in doc else None
    return ProfileDocument(prof, cs, c1, doc.get("name"))


def load_profile(path) -> ProfileDocument:
    """Read and validate a profile document."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read profile: {exc.strerror}", str(path)) from exc
    except yaml.YAMLError as exc:
        raise SchemaError(f"not valid YAML: {exc}", str(path)) from exc
    return profile_from_document(doc)


def profile_to_document(profile, cross_section: Optional[CrossSection] = None,
                        c1: Optional[float] = None) -> dict:
    if isinstance(profile, LayeredProfile):
        doc = dict(kind="layered", H=profile.H, breakpoints=profile.breakpoints.tolist(),
                   values=profile.values.tolist())
    else:
        doc = dict(kind="sampled", H=profile.H, grid=profile.grid.tolist(), samples=profile.samples.tolist(),
                   interpolation=profile.interpolation)
        if profile.dsamples is not None:
            doc["dsamples"] = profile.dsamples.tolist()
        if profile.ddsamples is not None:
            doc["ddsamples"] = profile.ddsamples.tolist()
    if cross_section is not None:
        doc["cross_section"] = {"lengths": list(cross_section.lengths)}
    if c1 is not None:
        doc["well"] = {"c1": float(c1)}
    return doc


# ---------------------------------------------------------------------------
# reports


def to_plain(obj):
    """Convert report objects into YAML-friendly builtins.

    Dataclasses become mappings (with ``holds`` added when defined), numpy
    scalars and arrays become floats and lists, non-finite floats become
    the strings ``inf``, ``-inf`` and ``nan``.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
               if f.name not in ("profile",)}
        if hasattr(type(obj), "holds"):
            out["holds"] = bool(obj.holds)
        return out
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dump_structured(report: dict) -> str:
    """One YAML document with keys in insertion order."""
    return yaml.safe_dump(to_plain(report), sort_keys=False, default_flow_style=None, width=120)


def dump_csv(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(v):
    v = to_plain(v)
    if isinstance(v, float):
        return repr(v)
    return v
