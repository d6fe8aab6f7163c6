"""Model transformations and the generational migration search.

Three behavior-preserving transformations act on the code model: moving
a member (method or constant) into another unit, and excluding a
parameter from a method. Excluding a parameter relocates the
parameter-borne references into every caller and plants a listener
constant in the method's unit that the callers invoke, so no new upward
dependency can appear.

Migration holds the conceptual architecture fixed and greedily adopts,
per generation, the candidate with the fewest violations (ties: best
quality, then canonical order) until no candidate strictly reduces the
violation count.

Every transformation is audited by an identity ledger: members keep a
stable id across moves and renames, and the multiset of
(caller id, callee id, kind) reference triples must be preserved
exactly by moves, and up to caller replication plus listener wiring by
parameter exclusion.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

from .errors import (ArchitectureMismatch, BadParamIndex, BehaviorLedgerError,
                     EmptyPopulation, NoSuchMember, NoSuchMethod,
                     NoViolations, TargetIsSource)
from .graph import unit_dependency_graph
from .model import (KIND_CONSTANT, KIND_METHOD, REF_INVOCATION, CodeModel,
                    Member, Reference, Unit, canonical_key, make_model)
from .quality import (EXCLUDE_PARAMETER, MOVE_CONSTANT, MOVE_METHOD,
                      FitnessConfig, LayeredAssignment, QualityScore,
                      ViolationReport, assess_edges, check_covers_model,
                      edge_resolvability, evaluate_quality, ref_coverage)

MOVE_MEMBER = "move_member"


@dataclass(frozen=True)
class Transformation:
    kind: str  # MOVE_MEMBER | EXCLUDE_PARAMETER
    unit: str
    member: str
    target_unit: str | None = None
    param_index: int | None = None

    def describe(self) -> str:
        if self.kind == MOVE_MEMBER:
            return f"move {self.unit}.{self.member} -> {self.target_unit}"
        return f"exclude parameter {self.param_index} of {self.unit}.{self.member}"


@dataclass(frozen=True)
class MigrationConfig:
    max_generations: int = 100
    max_candidates: int = 10_000
    max_layers: int = 3
    factor_resolvable: float = 0.25
    factor_unresolvable: float = 2.0
    cohesion_floor: float = 0.0

    def fitness(self) -> FitnessConfig:
        return FitnessConfig(
            max_layers=self.max_layers,
            factor_resolvable=self.factor_resolvable,
            factor_unresolvable=self.factor_unresolvable,
            cohesion_floor=self.cohesion_floor)


# ---------------------------------------------------------------------------
# identity ledger


class IdentityLedger:
    """Tracks member identity across relocations and renames.

    ``uid_of`` maps the current (unit, member) path to a stable id;
    paths change as members move, ids never do.
    """

    def __init__(self, path_to_uid: dict, next_uid: int):
        self._path_to_uid = path_to_uid
        self._next = next_uid

    @classmethod
    def for_model(cls, model: CodeModel) -> "IdentityLedger":
        mapping = {}
        counter = 0
        for u in model.units:
            for m in u.members:
                mapping[(u.name, m.name)] = counter
                counter += 1
        return cls(mapping, counter)

    def uid_of(self, unit: str, member: str) -> int:
        return self._path_to_uid[(unit, member)]

    def moved(self, unit: str, member: str, new_unit: str,
              new_member: str) -> "IdentityLedger":
        mapping = dict(self._path_to_uid)
        uid = mapping.pop((unit, member))
        mapping[(new_unit, new_member)] = uid
        return IdentityLedger(mapping, self._next)

    def added(self, unit: str, member: str) -> "IdentityLedger":
        if (unit, member) in self._path_to_uid:
            return self
        mapping = dict(self._path_to_uid)
        mapping[(unit, member)] = self._next
        return IdentityLedger(mapping, self._next + 1)


def reference_triples(model: CodeModel, ledger: IdentityLedger) -> Counter:
    """Multiset of (caller id, callee key, kind), weighted by occurrence
    count. Callee keys: ("m", uid) for members, ("u", unit) for
    unit-level targets, ("x", unit) for externals."""
    triples: Counter = Counter()
    for u in model.units:
        for m in u.members:
            caller = ledger.uid_of(u.name, m.name)
            for r in m.references:
                if r.external:
                    callee = ("x", r.to_unit)
                elif r.to_member is None:
                    callee = ("u", r.to_unit)
                else:
                    callee = ("m", ledger.uid_of(r.to_unit, r.to_member))
                triples[(caller, callee, r.kind)] += r.count
    return triples


def _triples_of_refs(caller_uid: int, refs, ledger: IdentityLedger) -> Counter:
    out: Counter = Counter()
    for r in refs:
        if r.external:
            callee = ("x", r.to_unit)
        elif r.to_member is None:
            callee = ("u", r.to_unit)
        else:
            callee = ("m", ledger.uid_of(r.to_unit, r.to_member))
        out[(caller_uid, callee, r.kind)] += r.count
    return out


def _ledger_mismatch(expected: Counter, actual: Counter, action: str):
    missing = expected - actual
    extra = actual - expected
    raise BehaviorLedgerError(
        f"{action} broke the reference ledger: "
        f"missing={dict(missing)} extra={dict(extra)}")


# ---------------------------------------------------------------------------
# transformations


def _retarget_reference(r: Reference, old_unit: str, old_member: str,
                        new_unit: str, new_member: str,
                        params: tuple) -> Reference:
    """Follow a moved member: references to it change target; a
    parameter-borne reference whose parameter no longer types the new
    target degrades to a direct reference."""
    if r.external or r.to_unit != old_unit or r.to_member != old_member:
        return r
    via = r.via
    if via is not None:
        p = params[via]
        if p.external or p.type_unit != new_unit:
            via = None
    return replace(r, to_unit=new_unit, to_member=new_member, via=via)


def _fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 1
    while f"{base}_moved{k}" in taken:
        k += 1
    return f"{base}_moved{k}"


def move_member(model: CodeModel, unit_name: str, member_name: str,
                target_unit: str) -> tuple[CodeModel, str]:
    """Relocate a member into another unit; every reference to it
    follows, with a minimal ``_moved<k>`` rename on name collision.
    Returns the new model and the member's (possibly renamed) name."""
    source = model.unit(unit_name)
    if source is None or source.member(member_name) is None:
        raise NoSuchMember(f"{unit_name}.{member_name}")
    target = model.unit(target_unit)
    if target is None:
        raise NoSuchMember(f"target unit {target_unit}")
    if target_unit == unit_name:
        raise TargetIsSource(f"{member_name} already lives in {unit_name}")

    subject = source.member(member_name)
    new_name = _fresh_name(member_name, set(target.member_names()))

    units = []
    for u in model.units:
        members = []
        for m in u.members:
            if u.name == unit_name and m.name == member_name:
                continue  # re-added to the target below
            refs = tuple(
                _retarget_reference(r, unit_name, member_name, target_unit,
                                    new_name, m.parameters)
                for r in m.references)
            members.append(replace(m, references=refs))
        if u.name == target_unit:
            moved = replace(
                subject, name=new_name,
                references=tuple(
                    _retarget_reference(r, unit_name, member_name,
                                        target_unit, new_name,
                                        subject.parameters)
                    for r in subject.references))
            members.append(moved)
        units.append(Unit(name=u.name, members=tuple(members)))
    return make_model(units, model.schema_version), new_name


@dataclass(frozen=True)
class ExclusionDiff:
    """What exclude_parameter did, for the ledger check."""
    removed_refs: tuple[Reference, ...]
    callers: tuple[tuple[str, str], ...]  # (unit, member) paths
    listener: str


def _callers_of(model: CodeModel, unit_name: str, method_name: str):
    out = []
    for u in model.units:
        for m in u.members:
            for r in m.references:
                if (not r.external and r.kind == REF_INVOCATION
                        and r.to_unit == unit_name
                        and r.to_member == method_name):
                    out.append((u.name, m.name))
                    break
    return out


def exclude_parameter(model: CodeModel, unit_name: str, method_name: str,
                      param_index: int) -> tuple[CodeModel, ExclusionDiff]:
    """Drop one parameter of a method. The parameter-borne references
    are replicated (direct) into every caller, and the callers are wired
    to a listener constant in the method's unit so the notification
    still flows downward. With no callers the references are dropped."""
    unit = model.unit(unit_name)
    method = unit.member(method_name) if unit else None
    if method is None or method.kind != KIND_METHOD:
        raise NoSuchMethod(f"{unit_name}.{method_name}")
    if not 0 <= param_index < len(method.parameters):
        raise BadParamIndex(
            f"{unit_name}.{method_name} has {len(method.parameters)} "
            f"parameter(s); cannot exclude index {param_index}")

    removed = tuple(r for r in method.references if r.via == param_index)
    callers = tuple(sorted(_callers_of(model, unit_name, method_name)))
    listener = _fresh_name(f"on_{method_name}_listener",
                           {m.name for m in unit.members
                            if m.kind != KIND_CONSTANT})

    replicated = tuple(replace(r, via=None) for r in removed)
    listener_ref = Reference(to_unit=unit_name, to_member=listener,
                             kind=REF_INVOCATION, via=None, count=1)

    units = []
    for u in model.units:
        members = []
        for m in u.members:
            if u.name == unit_name and m.name == method_name:
                params = (m.parameters[:param_index]
                          + m.parameters[param_index + 1:])
                refs = []
                for r in m.references:
                    if r.via == param_index:
                        continue
                    if r.via is not None and r.via > param_index:
                        r = replace(r, via=r.via - 1)
                    refs.append(r)
                m = replace(m, parameters=params, references=tuple(refs))
            if (u.name, m.name) in callers:
                m = replace(m, references=m.references + replicated
                            + (listener_ref,))
            members.append(m)
        if u.name == unit_name and unit.member(listener) is None:
            members.append(Member(name=listener, kind=KIND_CONSTANT))
        units.append(Unit(name=u.name, members=tuple(members)))
    return (make_model(units, model.schema_version),
            ExclusionDiff(removed_refs=removed, callers=callers,
                          listener=listener))


def apply_transformation(model: CodeModel, ledger: IdentityLedger,
                         t: Transformation) -> tuple[CodeModel, IdentityLedger]:
    """Apply and audit one transformation against the identity ledger."""
    before = reference_triples(model, ledger)
    if t.kind == MOVE_MEMBER:
        new_model, new_name = move_member(model, t.unit, t.member,
                                          t.target_unit)
        new_ledger = ledger.moved(t.unit, t.member, t.target_unit, new_name)
        expected = before
    else:
        new_model, diff = exclude_parameter(model, t.unit, t.member,
                                            t.param_index)
        new_ledger = ledger.added(t.unit, diff.listener)
        method_uid = ledger.uid_of(t.unit, t.member)
        listener_uid = new_ledger.uid_of(t.unit, diff.listener)
        expected = before - _triples_of_refs(method_uid, diff.removed_refs,
                                             ledger)
        for cu, cm in diff.callers:
            caller_uid = ledger.uid_of(cu, cm)
            expected += _triples_of_refs(caller_uid, diff.removed_refs, ledger)
            expected[(caller_uid, ("m", listener_uid), REF_INVOCATION)] += 1
    actual = reference_triples(new_model, new_ledger)
    if actual != expected:
        _ledger_mismatch(expected, actual, t.describe())
    return new_model, new_ledger


# ---------------------------------------------------------------------------
# candidate generation and selection


@dataclass(frozen=True)
class Candidate:
    model: CodeModel
    transformation: Transformation
    violation_count: int
    quality: QualityScore
    ledger: IdentityLedger = field(repr=False, compare=False)
    order_key: tuple = field(repr=False, compare=False)


def _enumerate_transformations(model: CodeModel, report: ViolationReport):
    """Canonically ordered transformation options for every violating
    edge: movable members go to every other unit; each implicated
    (method, parameter) pair yields one exclusion."""
    all_units = model.unit_names()
    seen = set()
    for edge_idx, assessment in enumerate(report.edges):
        if not assessment.violating:
            continue
        edge = assessment.edge
        unit = model.unit(edge.from_unit)
        move_subjects = []
        exclude_subjects = []
        for member_name, ref in edge.contributing_refs:
            member = unit.member(member_name)
            for kind in ref_coverage(unit, member, ref):
                if kind in (MOVE_METHOD, MOVE_CONSTANT):
                    move_subjects.append(member_name)
                else:
                    exclude_subjects.append((member_name, ref.via))
        for target in sorted(all_units):
            if target == edge.from_unit:
                continue
            for subject in sorted(set(move_subjects)):
                t = Transformation(kind=MOVE_MEMBER, unit=edge.from_unit,
                                   member=subject, target_unit=target)
                if t not in seen:
                    seen.add(t)
                    yield (edge_idx, 0, target, subject, -1), t
        for subject, via in sorted(set(exclude_subjects)):
            t = Transformation(kind=EXCLUDE_PARAMETER, unit=edge.from_unit,
                               member=subject, param_index=via)
            if t not in seen:
                seen.add(t)
                yield (edge_idx, 1, "", subject, via), t


def generate_candidates(model: CodeModel, architecture: LayeredAssignment,
                        report: ViolationReport,
                        config: MigrationConfig = MigrationConfig(),
                        ledger: IdentityLedger | None = None
                        ) -> list[Candidate]:
    """One scored candidate per applicable transformation, deduplicated
    by canonical model equality and capped at config.max_candidates in
    canonical order."""
    if report.violation_count == 0:
        raise NoViolations("no violating edges to act on")
    if ledger is None:
        ledger = IdentityLedger.for_model(model)

    out: list[Candidate] = []
    seen_models = {canonical_key(model)}
    for order_key, t in _enumerate_transformations(model, report):
        if len(out) >= config.max_candidates:
            break
        new_model, new_ledger = apply_transformation(model, ledger, t)
        key = canonical_key(new_model)
        if key in seen_models:
            continue
        seen_models.add(key)
        graph = unit_dependency_graph(new_model)
        resolvability = edge_resolvability(new_model, graph)
        new_report = assess_edges(new_model, graph, architecture)
        score = evaluate_quality(graph, architecture, resolvability,
                                 config.fitness())
        out.append(Candidate(model=new_model, transformation=t,
                             violation_count=new_report.violation_count,
                             quality=score, ledger=new_ledger,
                             order_key=order_key))
    return out


def select_fittest(candidates) -> Candidate:
    """Fewest violations, then best quality, then canonical order."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyPopulation("no candidates to select from")
    return min(candidates, key=lambda c: (c.violation_count,
                                          -c.quality.value, c.order_key))


# ---------------------------------------------------------------------------
# migration


@dataclass(frozen=True)
class LogEntry:
    generation: int
    candidate_count: int
    chosen: Transformation | None
    violation_count: int
    quality_value: float
    model: CodeModel = field(repr=False, compare=False)


@dataclass(frozen=True)
class MigrationLog:
    entries: tuple[LogEntry, ...]

    @property
    def final_violations(self) -> int:
        return self.entries[-1].violation_count

    @property
    def final_model(self) -> CodeModel:
        return self.entries[-1].model


def migrate(model: CodeModel, architecture: LayeredAssignment,
            config: MigrationConfig = MigrationConfig()
            ) -> tuple[CodeModel, MigrationLog]:
    """Generational greedy migration toward a fixed architecture.

    The first log row records the starting state; each later row one
    generation. The loop stops when violations reach zero, when the best
    candidate no longer strictly reduces them (that no-progress
    generation is still logged), or at the generation cap. The violation
    column never increases.
    """
    check_covers_model(architecture, model)
    ledger = IdentityLedger.for_model(model)
    current = model

    def assess(m):
        graph = unit_dependency_graph(m)
        resolvability = edge_resolvability(m, graph)
        report = assess_edges(m, graph, architecture)
        score = evaluate_quality(graph, architecture, resolvability,
                                 config.fitness())
        return report, score

    report, score = assess(current)
    violations = report.violation_count
    entries = [LogEntry(generation=1, candidate_count=0, chosen=None,
                        violation_count=violations,
                        quality_value=score.value, model=current)]

    for round_no in range(1, config.max_generations + 1):
        if violations == 0:
            break
        population = generate_candidates(current, architecture, report,
                                         config, ledger)
        generation = round_no + 1
        if population:
            winner = select_fittest(population)
        else:
            winner = None
        if winner is None or winner.violation_count >= violations:
            entries.append(LogEntry(
                generation=generation, candidate_count=len(population),
                chosen=None, violation_count=violations,
                quality_value=score.value, model=current))
            break
        current = winner.model
        ledger = winner.ledger
        violations = winner.violation_count
        report, score = assess(current)
        entries.append(LogEntry(
            generation=generation, candidate_count=len(population),
            chosen=winner.transformation, violation_count=violations,
            quality_value=score.value, model=current))

    return current, MigrationLog(entries=tuple(entries))


# ---------------------------------------------------------------------------
# log rendering


def log_to_doc(log: MigrationLog,
               config: MigrationConfig = MigrationConfig()) -> dict:
    return {
        "schema_version": 1,
        "factor_resolvable": config.factor_resolvable,
        "factor_unresolvable": config.factor_unresolvable,
        "generations": [
            {
                "generation": e.generation,
                "candidates": e.candidate_count,
                "chosen": e.chosen.describe() if e.chosen else None,
                "violations": e.violation_count,
                "quality": e.quality_value,
            }
            for e in log.entries
        ],
    }


def log_to_table(log: MigrationLog) -> str:
    from .util import format_table
    rows = [(e.generation, e.candidate_count,
             e.chosen.describe() if e.chosen else "-",
             e.violation_count, f"{e.quality_value:.5f}")
            for e in log.entries]
    return format_table(
        ["Generation", "Candidates", "Chosen", "Violations", "Quality"], rows)
