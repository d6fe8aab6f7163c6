"""Layered assignments and their quality score.

A layered assignment partitions the units into ordered layers (index 1
is the bottom). An edge pointing from a lower layer to a higher one is
an architecture violation; same-layer and downward edges conform, and a
downward edge may skip layers (layers are transparent to everything
below them). Violating edges are further split by whether the
migration transformations could eliminate every contributing reference:
resolvable violations are lightly penalized, unresolvable ones heavily.

The scalar score of an assignment is

    cohesion / (cohesion + coupling) * layer_count / max_layers

with cohesion the total weight of intra-layer edges and coupling the
factor-scaled weight of inter-layer edges. More layers are rewarded;
the normalization keeps the score inside [0, 1].
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field, replace

from . import _kernel
from .errors import (ArchitectureMismatch, EmptyCluster, InconsistentInputs,
                     NotAViolation, ParseError)
from .graph import DependencyEdge, DependencyGraph
from .model import KIND_CONSTANT, CodeModel, Member, Unit

SCHEMA_VERSION = 1

DEFAULT_MAX_LAYERS = 3
DEFAULT_FACTOR_RESOLVABLE = 0.25
DEFAULT_FACTOR_UNRESOLVABLE = 2.0

MOVE_METHOD = "move_method"
MOVE_CONSTANT = "move_constant"
EXCLUDE_PARAMETER = "exclude_parameter"
TRANSFORMATION_ORDER = (MOVE_METHOD, MOVE_CONSTANT, EXCLUDE_PARAMETER)

CONFORMANT = "conformant"
RESOLVABLE_VIOLATION = "resolvable_violation"
UNRESOLVABLE_VIOLATION = "unresolvable_violation"


@dataclass(frozen=True)
class FitnessConfig:
    max_layers: int = DEFAULT_MAX_LAYERS
    factor_resolvable: float = DEFAULT_FACTOR_RESOLVABLE
    factor_unresolvable: float = DEFAULT_FACTOR_UNRESOLVABLE
    cohesion_floor: float = 0.0

    def __post_init__(self):
        if self.max_layers < 1:
            raise ValueError("max_layers must be >= 1")
        if self.factor_resolvable <= 0 or self.factor_unresolvable <= 0:
            raise ValueError("violation factors must be positive")


@dataclass(frozen=True)
class LayeredAssignment:
    """Ordered layers, bottom first; every unit appears exactly once."""

    layers: tuple[tuple[str, ...], ...]
    _mapping: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mapping = {}
        for idx, layer in enumerate(self.layers, start=1):
            if not layer:
                raise EmptyCluster(f"layer {idx} is empty")
            for unit in layer:
                if unit in mapping:
                    raise InconsistentInputs(f"unit {unit} in multiple layers")
                mapping[unit] = idx
        object.__setattr__(self, "_mapping", mapping)

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    def layer_of(self, unit: str) -> int:
        try:
            return self._mapping[unit]
        except KeyError:
            raise ArchitectureMismatch(f"unit {unit} not assigned") from None

    def units(self) -> set[str]:
        return set(self._mapping)


def make_assignment(layers) -> LayeredAssignment:
    """Canonicalize: sort unit names within each layer."""
    return LayeredAssignment(tuple(tuple(sorted(layer)) for layer in layers))


# ---------------------------------------------------------------------------
# resolvability of individual references and edges


def member_interrelated(unit: Unit, member: Member) -> bool:
    """Does the member reference anything else in its own unit? Such a
    member cannot be moved out without dragging siblings along."""
    for r in member.references:
        if r.external or r.to_unit != unit.name:
            continue
        if r.to_member is None or r.to_member != member.name:
            return True
    return False


def ref_coverage(unit: Unit, member: Member, ref) -> tuple[str, ...]:
    """Transformations able to eliminate one inter-unit reference:

    * a constant's reference can always be relocated with it;
    * a method's direct reference can move with the method only when the
      method has no ties to its own unit;
    * a parameter-borne reference can be cut by excluding the parameter
      only when every reference of the method to that target unit rides
      the same parameter.
    """
    if member.kind == KIND_CONSTANT:
        return (MOVE_CONSTANT,)
    if ref.via is None:
        if not member_interrelated(unit, member):
            return (MOVE_METHOD,)
        return ()
    same_target = [r for r in member.references
                   if not r.external and r.to_unit == ref.to_unit]
    if all(r.via == ref.via for r in same_target):
        return (EXCLUDE_PARAMETER,)
    return ()


def edge_coverage(model: CodeModel, edge: DependencyEdge):
    """(fully_resolvable, applicable transformation kinds) of one edge."""
    unit = model.unit(edge.from_unit)
    kinds: set[str] = set()
    fully = True
    for member_name, ref in edge.contributing_refs:
        member = unit.member(member_name)
        cov = ref_coverage(unit, member, ref)
        if not cov:
            fully = False
        kinds.update(cov)
    ordered = tuple(k for k in TRANSFORMATION_ORDER if k in kinds)
    return fully, ordered


def edge_resolvability(model: CodeModel, graph: DependencyGraph):
    """Assignment-independent resolvable flag for every edge."""
    return {(e.from_unit, e.to_unit): edge_coverage(model, e)[0]
            for e in graph.edges}


def classify_resolvability(model: CodeModel, edge: DependencyEdge,
                           assignment: LayeredAssignment):
    """Classify one violating edge; raises NotAViolation on conformant
    edges. Returns (classification, applicable transformations)."""
    if assignment.layer_of(edge.from_unit) >= assignment.layer_of(edge.to_unit):
        raise NotAViolation(
            f"{edge.from_unit} -> {edge.to_unit} does not point upward")
    fully, kinds = edge_coverage(model, edge)
    return (RESOLVABLE_VIOLATION if fully else UNRESOLVABLE_VIOLATION), kinds


# ---------------------------------------------------------------------------
# violation detection and reports


@dataclass(frozen=True)
class EdgeAssessment:
    edge: DependencyEdge
    from_layer: int
    to_layer: int
    violating: bool
    classification: str | None  # None until resolvability was computed
    transformations: tuple[str, ...] = ()

    @property
    def resolvable(self) -> bool:
        return self.classification == RESOLVABLE_VIOLATION


@dataclass(frozen=True)
class ViolationReport:
    edges: tuple[EdgeAssessment, ...]

    @property
    def violations(self) -> tuple[EdgeAssessment, ...]:
        return tuple(a for a in self.edges if a.violating)

    @property
    def violation_count(self) -> int:
        return sum(1 for a in self.edges if a.violating)


def detect_violations(graph: DependencyGraph,
                      assignment: LayeredAssignment) -> ViolationReport:
    """Flag upward edges; resolvability classification stays unset."""
    _check_cover(graph, assignment)
    out = []
    for e in graph.edges:
        lf = assignment.layer_of(e.from_unit)
        lt = assignment.layer_of(e.to_unit)
        violating = lf < lt
        out.append(EdgeAssessment(
            edge=e, from_layer=lf, to_layer=lt, violating=violating,
            classification=None if violating else CONFORMANT))
    return ViolationReport(edges=tuple(out))


def assess_edges(model: CodeModel, graph: DependencyGraph,
                 assignment: LayeredAssignment) -> ViolationReport:
    """detect_violations plus resolvability on every violating edge."""
    base = detect_violations(graph, assignment)
    out = []
    for a in base.edges:
        if not a.violating:
            out.append(a)
            continue
        classification, kinds = classify_resolvability(model, a.edge, assignment)
        out.append(replace(a, classification=classification,
                           transformations=kinds))
    return ViolationReport(edges=tuple(out))


def _check_cover(graph: DependencyGraph, assignment: LayeredAssignment):
    if assignment.units() != set(graph.nodes):
        raise InconsistentInputs(
            "assignment does not cover exactly the graph's units")


# ---------------------------------------------------------------------------
# kernel-backed scoring


class GraphView:
    """Flat-array mirror of a dependency graph for the scoring kernel.

    Unit indices are lexicographic name ranks; edges are in canonical
    (from, to) order, which fixes the floating-point summation order for
    both kernel implementations.
    """

    __slots__ = ("names", "index", "src", "dst", "weight", "resolvable",
                 "config", "n_units")

    def __init__(self, graph: DependencyGraph, resolvability, config: FitnessConfig):
        self.names = graph.nodes
        self.n_units = len(self.names)
        self.index = {n: i for i, n in enumerate(self.names)}
        self.src = array("i", (self.index[e.from_unit] for e in graph.edges))
        self.dst = array("i", (self.index[e.to_unit] for e in graph.edges))
        self.weight = array("d", (float(e.weight) for e in graph.edges))
        self.resolvable = array("b", (
            1 if resolvability.get((e.from_unit, e.to_unit)) else 0
            for e in graph.edges))
        self.config = config

    def evaluate(self, membership, n_clusters: int, reorder: bool = True) -> float:
        c = self.config
        return _kernel.evaluate(
            membership, n_clusters, self.src, self.dst, self.weight,
            self.resolvable, c.max_layers, c.factor_resolvable,
            c.factor_unresolvable, c.cohesion_floor, reorder)

    def detail(self, membership, n_clusters: int, reorder: bool = True):
        c = self.config
        return _kernel.evaluate_detail(
            membership, n_clusters, self.src, self.dst, self.weight,
            self.resolvable, c.max_layers, c.factor_resolvable,
            c.factor_unresolvable, c.cohesion_floor, reorder)

    def membership_of(self, assignment: LayeredAssignment):
        """Membership array with cluster id == layer index - 1."""
        m = array("i", [-1]) * self.n_units
        for li, layer in enumerate(assignment.layers):
            for unit in layer:
                m[self.index[unit]] = li
        return m

    def assignment_from(self, membership, n_clusters: int) -> LayeredAssignment:
        """Materialize an ordered assignment from a raw partition."""
        layers_of_cluster = self.detail(membership, n_clusters, reorder=True)[4]
        layers = [[] for _ in range(n_clusters)]
        for u, c in enumerate(membership):
            if c >= 0:
                layers[layers_of_cluster[c] - 1].append(self.names[u])
        return make_assignment(layers)


def order_layers(clusters, graph: DependencyGraph,
                 max_layers: int = DEFAULT_MAX_LAYERS) -> LayeredAssignment:
    """Order a cluster partition into layers, bottom first.

    Each cluster's rank is the ratio of incoming to outgoing
    inter-cluster weight; a cluster with no outgoing weight is a pure
    sink and goes bottom-most. Ties: larger cluster first, then the one
    containing the lexicographically smallest unit name.
    """
    clusters = [tuple(sorted(c)) for c in clusters]
    for c in clusters:
        if not c:
            raise EmptyCluster("clusters must be non-empty")
    flat = [u for c in clusters for u in c]
    if len(flat) != len(set(flat)) or set(flat) != set(graph.nodes):
        raise InconsistentInputs("clusters must partition the graph's units")
    if not 1 <= len(clusters) <= max_layers:
        raise InconsistentInputs(
            f"cluster count {len(clusters)} outside 1..{max_layers}")

    view = GraphView(graph, {}, FitnessConfig(max_layers=max_layers))
    membership = array("i", [-1]) * view.n_units
    for ci, c in enumerate(clusters):
        for unit in c:
            membership[view.index[unit]] = ci
    return view.assignment_from(membership, len(clusters))


@dataclass(frozen=True)
class QualityScore:
    value: float
    cohesion_sum: float
    coupling_sum: float
    layer_factor: float
    # (from_unit, to_unit) -> (raw weight, applied factor); intra-layer
    # edges carry factor None (they count as cohesion, not coupling)
    per_edge: dict = field(repr=False, compare=False)


def evaluate_quality(graph: DependencyGraph, assignment: LayeredAssignment,
                     resolvability, config: FitnessConfig = FitnessConfig()
                     ) -> QualityScore:
    """Score an assignment against a graph.

    ``resolvability`` maps (from_unit, to_unit) to the edge's resolvable
    flag (see edge_resolvability); only violating edges consult it.
    Assignments with more layers than config.max_layers are normalized
    against their own layer count so the score stays within [0, 1].
    """
    _check_cover(graph, assignment)
    eff = replace(config, max_layers=max(config.max_layers,
                                         assignment.layer_count))
    view = GraphView(graph, resolvability, eff)
    membership = view.membership_of(assignment)
    value, cohesion, coupling, layer_factor, _ = view.detail(
        membership, assignment.layer_count, reorder=False)

    per_edge = {}
    for e in graph.edges:
        lf = assignment.layer_of(e.from_unit)
        lt = assignment.layer_of(e.to_unit)
        if lf == lt:
            factor = None
        elif lf > lt:
            factor = 1.0
        elif resolvability.get((e.from_unit, e.to_unit)):
            factor = eff.factor_resolvable
        else:
            factor = eff.factor_unresolvable
        per_edge[(e.from_unit, e.to_unit)] = (float(e.weight), factor)

    return QualityScore(value=value, cohesion_sum=cohesion,
                        coupling_sum=coupling, layer_factor=layer_factor,
                        per_edge=per_edge)


def quality_for_model(model: CodeModel, graph: DependencyGraph,
                      assignment: LayeredAssignment,
                      config: FitnessConfig = FitnessConfig()) -> QualityScore:
    """Convenience: derive resolvability from the model, then score."""
    return evaluate_quality(graph, assignment,
                            edge_resolvability(model, graph), config)


# ---------------------------------------------------------------------------
# documents


def assignment_to_doc(assignment: LayeredAssignment) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "layers": [{"index": i, "units": list(layer)}
                   for i, layer in enumerate(assignment.layers, start=1)],
    }


def assignment_from_doc(doc) -> LayeredAssignment:
    if not isinstance(doc, dict) or "layers" not in doc:
        raise ParseError("architecture document needs a 'layers' array", "$")
    layers_field = doc["layers"]
    if not isinstance(layers_field, list) or not layers_field:
        raise ParseError("'layers' must be a non-empty array", "$.layers")
    by_index = {}
    for i, entry in enumerate(layers_field):
        if not isinstance(entry, dict) or "index" not in entry or "units" not in entry:
            raise ParseError("each layer needs 'index' and 'units'",
                             f"$.layers[{i}]")
        if not isinstance(entry["units"], list):
            raise ParseError("'units' must be an array", f"$.layers[{i}]")
        if entry["index"] in by_index:
            raise ParseError(f"duplicate layer index {entry['index']}",
                             f"$.layers[{i}]")
        by_index[entry["index"]] = entry["units"]
    if sorted(by_index) != list(range(1, len(by_index) + 1)):
        raise ParseError("layer indices must be 1..n", "$.layers")
    return make_assignment([by_index[i] for i in sorted(by_index)])


def check_covers_model(assignment: LayeredAssignment, model: CodeModel):
    """Raise ArchitectureMismatch unless the assignment covers exactly
    the model's units."""
    assigned = assignment.units()
    model_units = set(model.unit_names())
    if assigned != model_units:
        missing = sorted(model_units - assigned)
        extra = sorted(assigned - model_units)
        raise ArchitectureMismatch(
            f"architecture/model unit mismatch: missing={missing} extra={extra}")


def report_to_doc(report: ViolationReport,
                  config: FitnessConfig = FitnessConfig()) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "factor_resolvable": config.factor_resolvable,
        "factor_unresolvable": config.factor_unresolvable,
        "violation_count": report.violation_count,
        "edges": [
            {
                "from": a.edge.from_unit,
                "to": a.edge.to_unit,
                "weight": a.edge.weight,
                "from_layer": a.from_layer,
                "to_layer": a.to_layer,
                "classification": a.classification,
                "transformations": list(a.transformations),
            }
            for a in report.edges
        ],
    }
