"""Language-neutral code model: units, members, references.

The model is the ingestion boundary of the whole tool: everything else
(dependency graphs, layering, migration) is derived from it. Models are
immutable after construction and canonically ordered, so structural
equality doubles as semantic equality.

Document format (JSON, UTF-8)::

    { "schema_version": 1,
      "units": [ { "name": "Controller1",
        "members": [ { "name": "handle", "kind": "method",
          "parameters": [ {"name": "v", "type_unit": "View1"} ],
          "references": [ {"to_unit": "View1", "to_member": "render",
                           "kind": "invocation", "via": {"parameter": 0},
                           "count": 2} ] } ] } ] }

``via`` is the string ``"direct"`` or ``{"parameter": <index>}``.
``to_unit`` / ``type_unit`` are either a unit name (internal) or
``{"external": "<name>"}`` for targets outside the modeled system.
``to_member`` may be ``null`` only for unit-level ``type_use``.
Unknown fields are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import ParseError, ValidationError

SCHEMA_VERSION = 1

KIND_METHOD = "method"
KIND_CONSTANT = "constant"
MEMBER_KINDS = (KIND_METHOD, KIND_CONSTANT)

REF_INVOCATION = "invocation"
REF_STATE_ACCESS = "state_access"
REF_TYPE_USE = "type_use"
REF_KINDS = (REF_INVOCATION, REF_STATE_ACCESS, REF_TYPE_USE)


@dataclass(frozen=True)
class Reference:
    """One outgoing dependency of a member.

    ``via`` is the index of the carrying parameter, or None for a direct
    reference. ``count`` is the number of occurrences in the (abstract)
    body; it never influences coupling weights, only bookkeeping.
    """

    to_unit: str
    to_member: str | None
    kind: str
    via: int | None = None
    count: int = 1
    external: bool = False

    def sort_key(self):
        return (
            self.external,
            self.to_unit,
            self.to_member is not None,
            self.to_member or "",
            self.kind,
            self.via is not None,
            self.via if self.via is not None else -1,
        )


@dataclass(frozen=True)
class Parameter:
    name: str
    type_unit: str
    external: bool = False


@dataclass(frozen=True)
class Member:
    name: str
    kind: str
    parameters: tuple[Parameter, ...] = ()
    references: tuple[Reference, ...] = ()


@dataclass(frozen=True)
class Unit:
    name: str
    members: tuple[Member, ...] = ()

    def member(self, name: str) -> Member | None:
        for m in self.members:
            if m.name == name:
                return m
        return None

    def member_names(self):
        return [m.name for m in self.members]


@dataclass(frozen=True)
class CodeModel:
    units: tuple[Unit, ...] = ()
    schema_version: int = SCHEMA_VERSION

    def unit(self, name: str) -> Unit | None:
        for u in self.units:
            if u.name == name:
                return u
        return None

    def unit_names(self):
        return [u.name for u in self.units]


def _merge_references(refs) -> tuple[Reference, ...]:
    """Collapse duplicates by (to_unit, to_member, kind, via, external),
    summing counts, and sort canonically."""
    merged: dict[tuple, Reference] = {}
    for r in refs:
        key = (r.external, r.to_unit, r.to_member, r.kind, r.via)
        if key in merged:
            old = merged[key]
            merged[key] = replace(old, count=old.count + r.count)
        else:
            merged[key] = r
    return tuple(sorted(merged.values(), key=Reference.sort_key))


def canonical_member(member: Member) -> Member:
    return replace(
        member,
        parameters=tuple(member.parameters),
        references=_merge_references(member.references),
    )


def make_model(units, schema_version: int = SCHEMA_VERSION) -> CodeModel:
    """Build a canonically-ordered model: units and members sorted by
    name, references merged and sorted. Parameters keep their order
    (they are positional)."""
    canon_units = []
    for u in sorted(units, key=lambda u: u.name):
        members = tuple(
            canonical_member(m) for m in sorted(u.members, key=lambda m: m.name)
        )
        canon_units.append(Unit(name=u.name, members=members))
    return CodeModel(units=tuple(canon_units), schema_version=schema_version)


def canonical_key(model: CodeModel) -> str:
    """Stable text identity of a model; equal models produce equal keys."""
    return serialize(model, indent=None)


# ---------------------------------------------------------------------------
# parsing


def _expect_keys(obj, allowed, required, where):
    unknown = set(obj) - set(allowed)
    if unknown:
        raise ParseError(f"unknown field(s) {sorted(unknown)}", where)
    missing = set(required) - set(obj)
    if missing:
        raise ParseError(f"missing field(s) {sorted(missing)}", where)


def _parse_unit_ref(value, where):
    """A unit reference is a plain name or {"external": name}."""
    if isinstance(value, str):
        return value, False
    if isinstance(value, dict):
        _expect_keys(value, ["external"], ["external"], where)
        if not isinstance(value["external"], str):
            raise ParseError("external marker must name the unit", where)
        return value["external"], True
    raise ParseError("expected unit name or {'external': name}", where)


def _parse_via(value, where):
    if value == "direct":
        return None
    if isinstance(value, dict):
        _expect_keys(value, ["parameter"], ["parameter"], where)
        idx = value["parameter"]
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
            raise ParseError("parameter index must be a non-negative integer", where)
        return idx
    raise ParseError("via must be 'direct' or {'parameter': index}", where)


def _parse_reference(obj, where):
    if not isinstance(obj, dict):
        raise ParseError("reference must be an object", where)
    _expect_keys(obj, ["to_unit", "to_member", "kind", "via", "count"],
                 ["to_unit", "kind"], where)
    to_unit, external = _parse_unit_ref(obj["to_unit"], where + ".to_unit")
    to_member = obj.get("to_member")
    if to_member is not None and not isinstance(to_member, str):
        raise ParseError("to_member must be a string or null", where)
    kind = obj["kind"]
    if kind not in REF_KINDS:
        raise ParseError(f"kind must be one of {REF_KINDS}", where)
    via = _parse_via(obj.get("via", "direct"), where + ".via")
    count = obj.get("count", 1)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ParseError("count must be a positive integer", where)
    return Reference(to_unit=to_unit, to_member=to_member, kind=kind,
                     via=via, count=count, external=external)


def _parse_parameter(obj, where):
    if not isinstance(obj, dict):
        raise ParseError("parameter must be an object", where)
    _expect_keys(obj, ["name", "type_unit"], ["name", "type_unit"], where)
    if not isinstance(obj["name"], str) or not obj["name"]:
        raise ParseError("parameter name must be a non-empty string", where)
    type_unit, external = _parse_unit_ref(obj["type_unit"], where + ".type_unit")
    return Parameter(name=obj["name"], type_unit=type_unit, external=external)


def _parse_member(obj, where):
    if not isinstance(obj, dict):
        raise ParseError("member must be an object", where)
    _expect_keys(obj, ["name", "kind", "parameters", "references"],
                 ["name", "kind"], where)
    if not isinstance(obj["name"], str) or not obj["name"]:
        raise ParseError("member name must be a non-empty string", where)
    kind = obj["kind"]
    if kind not in MEMBER_KINDS:
        raise ParseError(f"member kind must be one of {MEMBER_KINDS}", where)
    params = obj.get("parameters", [])
    refs = obj.get("references", [])
    if not isinstance(params, list) or not isinstance(refs, list):
        raise ParseError("parameters and references must be arrays", where)
    parameters = tuple(
        _parse_parameter(p, f"{where}.parameters[{i}]") for i, p in enumerate(params)
    )
    references = tuple(
        _parse_reference(r, f"{where}.references[{i}]") for i, r in enumerate(refs)
    )
    return Member(name=obj["name"], kind=kind,
                  parameters=parameters, references=references)


def _parse_unit(obj, where):
    if not isinstance(obj, dict):
        raise ParseError("unit must be an object", where)
    _expect_keys(obj, ["name", "members"], ["name"], where)
    if not isinstance(obj["name"], str) or not obj["name"]:
        raise ParseError("unit name must be a non-empty string", where)
    members = obj.get("members", [])
    if not isinstance(members, list):
        raise ParseError("members must be an array", where)
    return Unit(
        name=obj["name"],
        members=tuple(
            _parse_member(m, f"{where}.members[{i}]") for i, m in enumerate(members)
        ),
    )


def load_model(text: str) -> CodeModel:
    """Parse and fully validate a model document.

    Raises ParseError for malformed documents (with a location) and
    ValidationError for semantic problems (with every diagnostic, not
    just the first).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ParseError("model document must be an object", "$")
    _expect_keys(doc, ["schema_version", "units"], ["schema_version", "units"], "$")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ParseError(
            f"unsupported schema_version {doc['schema_version']!r}; "
            f"expected {SCHEMA_VERSION}", "$.schema_version")
    if not isinstance(doc["units"], list):
        raise ParseError("units must be an array", "$.units")
    units = [_parse_unit(u, f"units[{i}]") for i, u in enumerate(doc["units"])]
    model = make_model(units)
    diagnostics = validate(model)
    if diagnostics:
        raise ValidationError(diagnostics)
    return model


# ---------------------------------------------------------------------------
# serialization


def _via_doc(via):
    return "direct" if via is None else {"parameter": via}


def _unit_ref_doc(name, external):
    return {"external": name} if external else name


def model_to_doc(model: CodeModel) -> dict:
    return {
        "schema_version": model.schema_version,
        "units": [
            {
                "name": u.name,
                "members": [
                    {
                        "name": m.name,
                        "kind": m.kind,
                        "parameters": [
                            {"name": p.name,
                             "type_unit": _unit_ref_doc(p.type_unit, p.external)}
                            for p in m.parameters
                        ],
                        "references": [
                            {"to_unit": _unit_ref_doc(r.to_unit, r.external),
                             "to_member": r.to_member,
                             "kind": r.kind,
                             "via": _via_doc(r.via),
                             "count": r.count}
                            for r in m.references
                        ],
                    }
                    for m in u.members
                ],
            }
            for u in model.units
        ],
    }


def serialize(model: CodeModel, indent: int | None = 2) -> str:
    """Canonical text form; loading it back yields an equal model."""
    canonical = make_model(model.units, model.schema_version)
    text = json.dumps(model_to_doc(canonical), indent=indent, sort_keys=False)
    return text + "\n" if indent is not None else text


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Diagnostic:
    """A single invariant violation with a stable code and the offending
    path (unit.member or unit.member -> target)."""

    code: str
    path: str
    message: str

    def __str__(self):
        return f"{self.code} {self.path}: {self.message}"


def validate(model: CodeModel) -> list[Diagnostic]:
    """Check every model invariant; empty result means the model is valid."""
    out: list[Diagnostic] = []
    seen_units: set[str] = set()
    for u in model.units:
        if u.name in seen_units:
            out.append(Diagnostic("DUPLICATE_UNIT", u.name, "unit name reused"))
        seen_units.add(u.name)

    unit_members = {u.name: {m.name for m in u.members} for u in model.units}

    for u in model.units:
        seen_members: set[str] = set()
        for m in u.members:
            path = f"{u.name}.{m.name}"
            if m.name in seen_members:
                out.append(Diagnostic("DUPLICATE_MEMBER", path,
                                      "member name reused within unit"))
            seen_members.add(m.name)

            if m.kind == KIND_CONSTANT and m.parameters:
                out.append(Diagnostic("CONSTANT_HAS_PARAMS", path,
                                      "constants take no parameters"))

            for i, p in enumerate(m.parameters):
                if not p.external and p.type_unit not in unit_members:
                    out.append(Diagnostic(
                        "DANGLING_PARAM_TYPE", f"{path}({p.name})",
                        f"parameter type {p.type_unit} is not a unit"))

            for r in m.references:
                rpath = f"{path} -> {r.to_unit}" + (
                    f".{r.to_member}" if r.to_member else "")
                if r.count < 1:
                    out.append(Diagnostic("BAD_COUNT", rpath,
                                          "reference count must be >= 1"))
                if r.to_member is None and r.kind != REF_TYPE_USE:
                    out.append(Diagnostic(
                        "BAD_UNIT_LEVEL_REF", rpath,
                        "unit-level references must be type_use"))
                if r.via is not None:
                    if m.kind != KIND_METHOD:
                        out.append(Diagnostic(
                            "BAD_VIA_ON_CONSTANT", rpath,
                            "parameter-borne references need a method"))
                    elif r.via >= len(m.parameters):
                        out.append(Diagnostic(
                            "BAD_PARAM_INDEX", rpath,
                            f"via=parameter({r.via}) but method has "
                            f"{len(m.parameters)} parameter(s)"))
                    else:
                        p = m.parameters[r.via]
                        if (p.type_unit, p.external) != (r.to_unit, r.external):
                            out.append(Diagnostic(
                                "PARAM_TYPE_MISMATCH", rpath,
                                f"parameter {r.via} is typed {p.type_unit}, "
                                f"not {r.to_unit}"))
                if r.external:
                    continue
                if r.to_unit not in unit_members:
                    out.append(Diagnostic("DANGLING_REF_UNIT", rpath,
                                          f"no unit named {r.to_unit}"))
                elif r.to_member is not None and (
                        r.to_member not in unit_members[r.to_unit]):
                    out.append(Diagnostic("DANGLING_REF_MEMBER", rpath,
                                          f"{r.to_unit} has no member "
                                          f"{r.to_member}"))
    return out
