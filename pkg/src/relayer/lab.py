"""Desk-scale experiment bench: reference MVC fixture, controlled
erosion, a brute-force layering oracle, and the two end-to-end
experiments (reconstruction under increasing erosion, migration toward
a reconstructed architecture).

The fixture is a deterministic model/view/controller system. Units of a
role form a reference ring, which gives every role internal cohesion;
cross-role references all point downward (controller -> view/model,
view -> model), so the intended three-layer assignment is violation
free and, on small instances, provably optimal (the oracle enumerates
every partition). Baseline cross-role references deliberately resist
the migration transformations (their methods are tied to their own
units), keeping the reconstruction from trading violation-free layers
for cheap resolvable violations.

Erosion is injected round-robin as misplaced methods, misplaced
constants, and wrongly injected parameters, each adding upward
references against the intended layering. Every second misplaced
method also references a member of its host unit, which makes it
immovable and therefore an unresolvable violation.
"""

from __future__ import annotations

import random
import re
import statistics
from array import array
from dataclasses import dataclass
from itertools import combinations

from .errors import NotAFixture, TooLarge
from .graph import unit_dependency_graph
from .model import (KIND_CONSTANT, KIND_METHOD, REF_INVOCATION,
                    REF_STATE_ACCESS, REF_TYPE_USE, CodeModel, Member,
                    Parameter, Reference, Unit, make_model)
from .quality import (GraphView, LayeredAssignment, QualityScore,
                      edge_resolvability, evaluate_quality, make_assignment)
from .reconstruct import ReconstructionConfig, reconstruct
from .refactor import MigrationConfig, MigrationLog, migrate
from .util import mix_seed

ROLES = ("model", "view", "controller")  # bottom to top
_ROLE_PREFIX = {"model": "Model", "view": "View", "controller": "Controller"}
_UNIT_RE = re.compile(r"^(Model|View|Controller)(\d+)$")

INJECTION_KINDS = ("misplaced_method", "misplaced_constant", "wrong_parameter")


@dataclass(frozen=True)
class FixtureSpec:
    units_per_role: int = 5
    downward_refs: int = 2  # references per view unit into the models
    # coupling weight of the reference ring inside each role; heavy
    # rings keep the layering honest (splitting a role is expensive)
    ring_weight: int = 5

    def __post_init__(self):
        if self.units_per_role < 1:
            raise ValueError("units_per_role must be >= 1")
        if not 1 <= self.ring_weight <= 6:
            raise ValueError("ring_weight must be in 1..6")


@dataclass(frozen=True)
class InjectionPlan:
    count: int
    seed: int = 0
    # distinct reference triples per injected violation
    strength: int = 4


def _unit_name(role: str, i: int) -> str:
    return f"{_ROLE_PREFIX[role]}{i}"


def build_mvc_fixture(spec: FixtureSpec = FixtureSpec()
                      ) -> tuple[CodeModel, LayeredAssignment]:
    """Deterministic MVC fixture plus its intended layering (models at
    the bottom, controllers on top)."""
    n = spec.units_per_role
    nxt = lambda i: (i % n) + 1
    units = []

    # distinct (to_member, kind) pairs backing one ring edge per role;
    # the first spec.ring_weight of them are used. Deliberately no
    # invocation kind: ring methods must not count as callers, or
    # excluding a wrongly injected parameter would replicate its
    # references into sibling units and re-create the violation there.
    ring_pairs = {
        "model": (("get_state", REF_STATE_ACCESS),
                  ("default_state", REF_STATE_ACCESS),
                  ("set_state", REF_STATE_ACCESS),
                  ("get_state", REF_TYPE_USE),
                  (None, REF_TYPE_USE),
                  ("set_state", REF_TYPE_USE)),
        "view": (("render", REF_STATE_ACCESS),
                 ("template", REF_STATE_ACCESS),
                 ("render", REF_TYPE_USE),
                 ("load", REF_STATE_ACCESS),
                 (None, REF_TYPE_USE),
                 ("load", REF_TYPE_USE)),
        "controller": (("dispatch", REF_STATE_ACCESS),
                       ("routes", REF_STATE_ACCESS),
                       ("dispatch", REF_TYPE_USE),
                       ("routes", REF_TYPE_USE),
                       (None, REF_TYPE_USE),
                       ("chain_peer", REF_STATE_ACCESS)),
    }

    def ring_refs(role: str, i: int, own_member: str) -> tuple[Reference, ...]:
        # two ring hops (next and next-but-one) so partial placements
        # already see closed cycles; a lone next-hop chain invites
        # profitable splits during greedy seeding
        w = spec.ring_weight
        hops = [(1, w if n == 2 else w - w // 2)]
        if n > 2:
            hops.append((2, w // 2))
        refs = []
        for offset, weight in hops:
            peer = _unit_name(role, ((i - 1 + offset) % n) + 1)
            refs.extend(Reference(peer, member, kind)
                        for member, kind in ring_pairs[role][:weight])
        # tie to the own unit: the ring method can never be moved out
        refs.append(Reference(_unit_name(role, i), own_member,
                              REF_STATE_ACCESS))
        return tuple(refs)

    for i in range(1, n + 1):
        members = [
            Member(name="default_state", kind=KIND_CONSTANT),
            Member(name="get_state", kind=KIND_METHOD, references=(
                Reference(_unit_name("model", i), "default_state",
                          REF_STATE_ACCESS),)),
            Member(name="set_state", kind=KIND_METHOD, references=(
                Reference(_unit_name("model", i), "default_state",
                          REF_STATE_ACCESS),)),
        ]
        if n > 1:
            members.append(Member(name="sync_peer", kind=KIND_METHOD,
                                  references=ring_refs("model", i,
                                                       "default_state")))
        units.append(Unit(name=_unit_name("model", i), members=tuple(members)))

    model_targets = (("get_state", REF_INVOCATION),
                     ("default_state", REF_STATE_ACCESS),
                     ("set_state", REF_INVOCATION))

    def model_ref(i: int, r: int) -> Reference:
        member, kind = model_targets[r % 3]
        target = ((i - 1 + r) % n) + 1
        return Reference(_unit_name("model", target), member, kind)

    view_method_names = ["load", "bind"]

    for i in range(1, n + 1):
        # the intra-unit reference ties each downward-looking method to
        # its unit, so no baseline reference is resolvable by a move
        members = [
            Member(name="render", kind=KIND_METHOD),
            Member(name="template", kind=KIND_CONSTANT),
        ]
        for r in range(max(1, spec.downward_refs)):
            mname = (view_method_names[r] if r < len(view_method_names)
                     else f"feed_{r}")
            members.append(Member(name=mname, kind=KIND_METHOD, references=(
                model_ref(i, r),
                Reference(_unit_name("view", i), "template",
                          REF_STATE_ACCESS),)))
        if n > 1:
            members.append(Member(name="mirror_peer", kind=KIND_METHOD,
                                  references=ring_refs("view", i, "template")))
        units.append(Unit(name=_unit_name("view", i), members=tuple(members)))

    for i in range(1, n + 1):
        # strict adjacent-layer flow: controllers talk to views only,
        # and (except for the first controller) only through the
        # injected view parameter. Controller1 also reaches its view
        # directly and leans on its own routes table, which no
        # transformation can untangle; migrations that run against a
        # reconstructed architecture hostile to the controllers top out
        # on that edge instead of emptying every dispatch parameter.
        refs = [Reference(_unit_name("view", i), "render",
                          REF_INVOCATION, via=0)]
        if i == 1:
            refs += [Reference(_unit_name("view", i), None, REF_TYPE_USE),
                     Reference(_unit_name("controller", i), "routes",
                               REF_STATE_ACCESS)]
        members = [
            Member(name="dispatch", kind=KIND_METHOD,
                   parameters=(Parameter(name="view",
                                         type_unit=_unit_name("view", i)),),
                   references=tuple(refs)),
            Member(name="routes", kind=KIND_CONSTANT),
        ]
        if n > 1:
            members.append(Member(name="chain_peer", kind=KIND_METHOD,
                                  references=ring_refs("controller", i,
                                                       "routes")))
        units.append(Unit(name=_unit_name("controller", i),
                          members=tuple(members)))

    model = make_model(units)
    intended = make_assignment([
        [_unit_name("model", i) for i in range(1, n + 1)],
        [_unit_name("view", i) for i in range(1, n + 1)],
        [_unit_name("controller", i) for i in range(1, n + 1)],
    ])
    return model, intended


def fixture_roles(model: CodeModel) -> dict[str, list[str]]:
    """Role -> unit names; raises NotAFixture on foreign unit names."""
    roles = {r: [] for r in ROLES}
    for name in model.unit_names():
        m = _UNIT_RE.match(name)
        if not m:
            raise NotAFixture(f"unit {name} does not follow fixture naming")
        roles[m.group(1).lower()].append(name)
    if not all(roles.values()):
        raise NotAFixture("fixture needs units of every role")
    return roles


def intended_assignment(model: CodeModel) -> LayeredAssignment:
    roles = fixture_roles(model)
    return make_assignment([roles["model"], roles["view"], roles["controller"]])


def constant_injection_names(count: int) -> list[str]:
    """Names of the constants a plan of this size injects."""
    return [f"stray_binding_{j}" for j in range(1, count + 1)
            if INJECTION_KINDS[(j - 1) % 3] == "misplaced_constant"]


def inject_violations(model: CodeModel, plan: InjectionPlan) -> CodeModel:
    """Erode a fixture with plan.count upward dependencies, cycling
    through the three injection kinds. Unit pairs are drawn without
    replacement, so plans of size k and k+1 share their first k
    injections."""
    roles = fixture_roles(model)
    rng = random.Random(plan.seed)
    # mutable working copy: unit -> list of members
    members_by_unit = {u.name: list(u.members) for u in model.units}
    used_pairs: set[tuple[str, str]] = set()

    def member_names(unit, kind=None):
        return sorted(m.name for m in members_by_unit[unit]
                      if kind is None or m.kind == kind)

    def has_callers(unit, method):
        for uname, members in members_by_unit.items():
            for m in members:
                for r in m.references:
                    if (not r.external and r.kind == REF_INVOCATION
                            and r.to_unit == unit and r.to_member == method):
                        return True
        return False

    def refs_to(member: Member, unit: str) -> bool:
        return any(not r.external and r.to_unit == unit
                   for r in member.references)

    def draw_pair(src_role, dst_role):
        for _ in range(1000):
            src = rng.choice(sorted(roles[src_role]))
            dst = rng.choice(sorted(roles[dst_role]))
            if (src, dst) not in used_pairs:
                used_pairs.add((src, dst))
                return src, dst
        raise NotAFixture("fixture too small for the requested injections")

    # erosion couples adjacent layers: code below reaches into the layer
    # directly above it (for parameters this is also what keeps every
    # caller at or above the injected type's layer). The two classes
    # alternate deterministically so each erosion level spreads evenly.
    upward_pairs = (("model", "view"), ("view", "controller"))

    def stray_refs(dst, targets, via=None):
        kinds_cycle = (REF_INVOCATION, REF_STATE_ACCESS, REF_TYPE_USE)
        refs = []
        for t in range(plan.strength):
            member = targets[t % len(targets)]
            kind = kinds_cycle[(t // len(targets)) % 3]
            refs.append(Reference(dst, member, kind, via=via))
        return refs

    for j in range(1, plan.count + 1):
        kind = INJECTION_KINDS[(j - 1) % 3]
        src_role, dst_role = upward_pairs[(j - 1) % 2]
        if kind == "wrong_parameter":
            for _ in range(1000):
                src, dst = draw_pair(src_role, dst_role)
                victims = [
                    m for m in members_by_unit[src]
                    if m.kind == KIND_METHOD and has_callers(src, m.name)
                    and not refs_to(m, dst)
                ]
                if victims:
                    break
                used_pairs.discard((src, dst))
            victim = rng.choice(sorted(victims, key=lambda m: m.name))
            dst_members = member_names(dst, kind=KIND_METHOD)
            targets = (rng.sample(dst_members, 2) if len(dst_members) >= 2
                       else [dst_members[0]])
            idx = len(victim.parameters)
            new_victim = Member(
                name=victim.name, kind=victim.kind,
                parameters=victim.parameters + (
                    Parameter(name=f"injected_{j}", type_unit=dst),),
                references=victim.references + tuple(
                    stray_refs(dst, targets, via=idx)))
            members_by_unit[src] = [
                new_victim if m.name == victim.name else m
                for m in members_by_unit[src]
            ]
            continue

        src, dst = draw_pair(src_role, dst_role)
        dst_members = member_names(dst, kind=KIND_METHOD)
        targets = (rng.sample(dst_members, 2) if len(dst_members) >= 2
                   else [dst_members[0]])
        if kind == "misplaced_method":
            occurrence = (j + 2) // 3
            refs = stray_refs(dst, targets)
            if occurrence <= 2:  # the first stray method of each class
                # also touches its host unit, which makes it immovable
                local = rng.choice(member_names(src))
                refs.append(Reference(src, local, REF_STATE_ACCESS))
            members_by_unit[src].append(Member(
                name=f"stray_call_{j}", kind=KIND_METHOD,
                references=tuple(refs)))
        else:
            members_by_unit[src].append(Member(
                name=f"stray_binding_{j}", kind=KIND_CONSTANT,
                references=tuple(stray_refs(dst, targets))))

    return make_model([Unit(name=name, members=tuple(ms))
                       for name, ms in members_by_unit.items()])


# ---------------------------------------------------------------------------
# exhaustive oracle


def _partitions_upto(n: int, max_k: int):
    """Every partition of range(n) into 1..max_k blocks, as restricted
    growth strings, in lexicographic order."""
    rgs = [0] * n

    def rec(i: int, mx: int):
        if i == n:
            yield rgs, mx + 1
            return
        for c in range(min(mx + 1, max_k - 1) + 1):
            rgs[i] = c
            yield from rec(i + 1, max(mx, c))

    yield from rec(1, 0) if n > 0 else iter(())


def exhaustive_oracle(model: CodeModel,
                      config: ReconstructionConfig = ReconstructionConfig()
                      ) -> tuple[LayeredAssignment, QualityScore]:
    """Best assignment over every partition into at most max_layers
    layers. Guarded to small unit counts; ties go to the first partition
    in enumeration order."""
    n = len(model.units)
    if n > 10:
        raise TooLarge(f"{n} units is beyond the enumeration guard (10)")
    if n == 0:
        raise TooLarge("empty model")
    graph = unit_dependency_graph(model)
    resolvability = edge_resolvability(model, graph)
    view = GraphView(graph, resolvability, config.fitness())

    best_val = None
    best = None
    membership = array("i", [0]) * n
    for rgs, k in _partitions_upto(n, config.max_layers):
        for i in range(n):
            membership[i] = rgs[i]
        val = view.evaluate(membership, k)
        if best_val is None or val > best_val:
            best_val = val
            best = (array("i", rgs), k)

    assignment = view.assignment_from(*best)
    score = evaluate_quality(graph, assignment, resolvability, config.fitness())
    return assignment, score


# ---------------------------------------------------------------------------
# random models (calibration and property testing)


def random_model(rng: random.Random, min_units: int = 2,
                 max_units: int = 8) -> CodeModel:
    """Small valid model with a random reference structure."""
    n = rng.randint(min_units, max_units)
    names = [f"Node{chr(ord('A') + i)}" for i in range(n)]

    skeleton = []
    for name in names:
        members = []
        for j in range(rng.randint(1, 3)):
            if rng.random() < 0.3:
                members.append((f"value_{j}", KIND_CONSTANT, ()))
            else:
                params = tuple(
                    Parameter(name=f"p{t}", type_unit=rng.choice(names))
                    for t in range(rng.randint(0, 2)))
                members.append((f"op_{j}", KIND_METHOD, params))
        skeleton.append((name, members))

    member_names = {name: [m[0] for m in members]
                    for name, members in skeleton}

    units = []
    for name, members in skeleton:
        built = []
        for mname, kind, params in members:
            refs = []
            for _ in range(rng.randint(0, 3)):
                if rng.random() < 0.1:
                    refs.append(Reference("ext.Runtime", None, REF_TYPE_USE,
                                          external=True))
                    continue
                via = None
                if kind == KIND_METHOD and params and rng.random() < 0.35:
                    via = rng.randrange(len(params))
                    target_unit = params[via].type_unit
                else:
                    target_unit = rng.choice(names)
                if rng.random() < 0.15:
                    refs.append(Reference(target_unit, None, REF_TYPE_USE,
                                          via=via))
                else:
                    refs.append(Reference(
                        target_unit,
                        rng.choice(member_names[target_unit]),
                        rng.choice((REF_INVOCATION, REF_STATE_ACCESS)),
                        via=via,
                        count=rng.randint(1, 3)))
            built.append(Member(name=mname, kind=kind, parameters=params,
                                references=tuple(refs)))
        units.append(Unit(name=name, members=tuple(built)))
    return make_model(units)


def random_assignment(rng: random.Random, model: CodeModel,
                      max_layers: int = 3) -> LayeredAssignment:
    """Random partition of the model's units into ordered layers."""
    names = model.unit_names()
    k = rng.randint(1, min(max_layers, len(names)))
    layers = [[] for _ in range(k)]
    shuffled = list(names)
    rng.shuffle(shuffled)
    for i, name in enumerate(shuffled):
        layers[i % k].append(name)
    return make_assignment(layers)


# ---------------------------------------------------------------------------
# experiments


def misplaced_units(reconstructed: LayeredAssignment,
                    intended: LayeredAssignment) -> int:
    """Minimum unit disagreements over all order-preserving matchings of
    reconstructed layers onto intended layers."""
    units = sorted(reconstructed.units())
    L = reconstructed.layer_count
    M = intended.layer_count
    best = len(units)
    for chosen in combinations(range(1, M + 1), min(L, M)):
        mapping = {i + 1: chosen[i] for i in range(len(chosen))}
        wrong = sum(
            1 for u in units
            if mapping.get(reconstructed.layer_of(u)) != intended.layer_of(u))
        best = min(best, wrong)
    return best


@dataclass(frozen=True)
class ReconstructionRow:
    injected: int
    layers: int
    misplaced: int
    violations: int
    quality: float


def reconstruction_experiment(seed: int = 0,
                              spec: FixtureSpec = FixtureSpec(),
                              max_injections: int = 10,
                              config: ReconstructionConfig | None = None
                              ) -> list[ReconstructionRow]:
    """Erode a fresh fixture with k = 0..max_injections violations and
    reconstruct each time. The injection plan seed is shared across k,
    so each experiment extends the previous one by one violation."""
    base, intended = build_mvc_fixture(spec)
    plan_seed = mix_seed(seed, 1)
    recon_seed = mix_seed(seed, 2)
    rows = []
    cfg = config if config is not None else ReconstructionConfig(seed=recon_seed)
    for k in range(max_injections + 1):
        eroded = inject_violations(base, InjectionPlan(count=k, seed=plan_seed))
        result = reconstruct(eroded, cfg)
        rows.append(ReconstructionRow(
            injected=k,
            layers=result.architecture.layer_count,
            misplaced=misplaced_units(result.architecture, intended),
            violations=result.report.violation_count,
            quality=result.quality.value))
    return rows


def refactoring_experiment(seed: int = 0,
                           spec: FixtureSpec = FixtureSpec(),
                           injections: int = 10,
                           migration: MigrationConfig = MigrationConfig()
                           ) -> MigrationLog:
    """Erode a fixture, reconstruct the two-layer conceptual
    architecture the migration experiment runs against, then migrate
    the eroded model toward it.

    The reconstruction is capped at two layers: the published migration
    scenario pairs ten injected violations with the two-layer
    architecture that heavy erosion produces."""
    base, _ = build_mvc_fixture(spec)
    eroded = inject_violations(
        base, InjectionPlan(count=injections, seed=mix_seed(seed, 1)))
    result = reconstruct(eroded, ReconstructionConfig(
        seed=mix_seed(seed, 2), max_layers=2))
    _, log = migrate(eroded, result.architecture, migration)
    return log


# ---------------------------------------------------------------------------
# statistics


def _average_ranks(xs) -> list[float]:
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = rank
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Rank correlation with average ranks on ties; 0.0 when either
    side is constant."""
    rx = _average_ranks(list(xs))
    ry = _average_ranks(list(ys))
    if len(set(rx)) < 2 or len(set(ry)) < 2:
        return 0.0
    return statistics.correlation(rx, ry)
