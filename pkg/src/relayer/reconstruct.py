"""Search for a layered conceptual architecture.

A greedy pass seeds each restart: units are visited by descending total
incident coupling weight and placed wherever the partial assignment
scores best (opening a new layer while the cap allows it). Steepest-
ascent hill climbing then improves the seed by single-unit relocations
and pairwise swaps; cluster order is re-derived after every tentative
move, so a move can flip the whole layering. Restarts differ only in
how the greedy pass breaks score ties; the best-scoring restart wins.
"""

from __future__ import annotations

import random
from array import array
from dataclasses import dataclass

from .errors import EmptyModel
from .graph import DependencyGraph, unit_dependency_graph
from .model import CodeModel
from .quality import (DEFAULT_FACTOR_RESOLVABLE, DEFAULT_FACTOR_UNRESOLVABLE,
                      DEFAULT_MAX_LAYERS, FitnessConfig, GraphView,
                      LayeredAssignment, QualityScore, ViolationReport,
                      assess_edges, edge_resolvability, evaluate_quality)
from .util import mix_seed


@dataclass(frozen=True)
class ReconstructionConfig:
    max_layers: int = DEFAULT_MAX_LAYERS
    restarts: int = 5
    seed: int = 0
    factor_resolvable: float = DEFAULT_FACTOR_RESOLVABLE
    factor_unresolvable: float = DEFAULT_FACTOR_UNRESOLVABLE
    max_hill_steps: int = 10_000
    cohesion_floor: float = 0.0

    def fitness(self) -> FitnessConfig:
        return FitnessConfig(
            max_layers=self.max_layers,
            factor_resolvable=self.factor_resolvable,
            factor_unresolvable=self.factor_unresolvable,
            cohesion_floor=self.cohesion_floor)


@dataclass(frozen=True)
class ReflexionModel:
    model: CodeModel
    architecture: LayeredAssignment
    report: ViolationReport
    quality: QualityScore


def _view_for(model: CodeModel, graph: DependencyGraph,
              config: ReconstructionConfig) -> GraphView:
    return GraphView(graph, edge_resolvability(model, graph), config.fitness())


def _visit_order(view: GraphView):
    """Unit indices by descending total incident weight, names ascending
    on ties (unit index order is name order)."""
    incident = [0.0] * view.n_units
    for e in range(len(view.src)):
        incident[view.src[e]] += view.weight[e]
        incident[view.dst[e]] += view.weight[e]
    return sorted(range(view.n_units), key=lambda u: (-incident[u], u))


def _greedy_membership(view: GraphView, max_layers: int,
                       rng: random.Random | None,
                       shuffle_visit: bool = False):
    """Greedy seed as a raw partition (membership array, cluster count).

    Placement score ties are the only decision point: without an rng the
    first-listed option wins (existing clusters before a new one, which
    biases toward joining), with an rng the choice among the tied
    placements is random. Perturbed restarts additionally shuffle the
    visit order (shuffle_visit), which is what actually moves the search
    between basins on symmetric systems.
    """
    membership = array("i", [-1]) * view.n_units
    n_clusters = 0
    if shuffle_visit and rng is not None:
        visit = list(range(view.n_units))
        rng.shuffle(visit)
    else:
        visit = _visit_order(view)
    for u in visit:
        options = list(range(n_clusters))
        if n_clusters < max_layers:
            options.append(n_clusters)
        best_val = None
        best_options = []
        for c in options:
            membership[u] = c
            val = view.evaluate(membership, n_clusters + (c == n_clusters))
            if best_val is None or val > best_val:
                best_val = val
                best_options = [c]
            elif val == best_val:
                best_options.append(c)
        if len(best_options) == 1 or rng is None:
            choice = best_options[0]
        else:
            choice = rng.choice(best_options)
        membership[u] = choice
        if choice == n_clusters:
            n_clusters += 1
    return membership, n_clusters


def greedy_seed(graph: DependencyGraph, model: CodeModel,
                config: ReconstructionConfig,
                rng: random.Random | None = None) -> LayeredAssignment:
    """Greedy start solution (see _greedy_membership)."""
    if not graph.nodes:
        raise EmptyModel("cannot seed an empty model")
    view = _view_for(model, graph, config)
    membership, n_clusters = _greedy_membership(view, config.max_layers, rng)
    return view.assignment_from(membership, n_clusters)


def _relabel_by_layer(view: GraphView, membership, n_clusters: int):
    """Renumber clusters so id == layer - 1 (canonical for enumeration)."""
    layers = view.detail(membership, n_clusters)[4]
    for u in range(view.n_units):
        if membership[u] >= 0:
            membership[u] = layers[membership[u]] - 1


def _hill_climb_membership(view: GraphView, membership, n_clusters: int,
                           max_steps: int) -> float:
    """Steepest ascent in place; returns the reached score.

    Neighborhood: every relocation of a unit to another layer (source
    layer must stay non-empty, so the layer count is invariant) plus
    every cross-layer pairwise swap. The strictly best improving
    neighbor wins; ties go to the first in enumeration order
    (relocations before swaps, units in name order).
    """
    n = view.n_units
    sizes = [0] * n_clusters
    for u in range(n):
        sizes[membership[u]] += 1
    current = view.evaluate(membership, n_clusters)

    for _ in range(max_steps):
        best_val = current
        best_move = None  # ("r", u, target) | ("s", u, v)

        for u in range(n):
            cu = membership[u]
            if sizes[cu] == 1:
                continue
            for t in range(n_clusters):
                if t == cu:
                    continue
                membership[u] = t
                val = view.evaluate(membership, n_clusters)
                if val > best_val:
                    best_val = val
                    best_move = ("r", u, t)
            membership[u] = cu

        for u in range(n):
            cu = membership[u]
            for v in range(u + 1, n):
                cv = membership[v]
                if cv == cu:
                    continue
                membership[u] = cv
                membership[v] = cu
                val = view.evaluate(membership, n_clusters)
                if val > best_val:
                    best_val = val
                    best_move = ("s", u, v)
                membership[u] = cu
                membership[v] = cv

        if best_move is None:
            break
        if best_move[0] == "r":
            _, u, t = best_move
            membership[u] = t
        else:
            _, u, v = best_move
            membership[u], membership[v] = membership[v], membership[u]
        current = best_val
        _relabel_by_layer(view, membership, n_clusters)
        sizes = [0] * n_clusters
        for u in range(n):
            sizes[membership[u]] += 1
    return current


def hill_climb(start: LayeredAssignment, graph: DependencyGraph,
               model: CodeModel,
               config: ReconstructionConfig) -> LayeredAssignment:
    """Improve an assignment by steepest-ascent local search; the result
    never scores below the input."""
    view = _view_for(model, graph, config)
    membership = view.membership_of(start)
    _hill_climb_membership(view, membership, start.layer_count,
                           config.max_hill_steps)
    return view.assignment_from(membership, start.layer_count)


def reconstruct(model: CodeModel,
                config: ReconstructionConfig = ReconstructionConfig()
                ) -> ReflexionModel:
    """Full reconstruction: seeded greedy + hill-climbing restarts, best
    result wins (earlier restart on ties). Deterministic per seed."""
    if not model.units:
        raise EmptyModel("cannot reconstruct an empty model")
    graph = unit_dependency_graph(model)
    resolvability = edge_resolvability(model, graph)
    view = GraphView(graph, resolvability, config.fitness())

    best_val = None
    best = None  # (membership, n_clusters)
    for r in range(max(1, config.restarts)):
        # restart 0 is the unperturbed greedy; later restarts explore
        # other basins via random tie decisions and visit orders, and
        # alternate the seeding cap so assignments with fewer layers get
        # a dedicated start (hill climbing keeps the layer count fixed,
        # so only seeding can reach them)
        rng = random.Random(mix_seed(config.seed, r)) if r > 0 else None
        if r == 0 or r % 2 == 1 or config.max_layers <= 2:
            cap = config.max_layers
        else:
            span = config.max_layers - 2  # caps cycle max_layers-1 .. 2
            cap = config.max_layers - 1 - ((r // 2 - 1) % span)
        membership, n_clusters = _greedy_membership(
            view, cap, rng, shuffle_visit=r > 0)
        _relabel_by_layer(view, membership, n_clusters)
        val = _hill_climb_membership(view, membership, n_clusters,
                                     config.max_hill_steps)
        if best_val is None or val > best_val:
            best_val = val
            best = (membership, n_clusters)

    assignment = view.assignment_from(*best)
    report = assess_edges(model, graph, assignment)
    score = evaluate_quality(graph, assignment, resolvability, config.fitness())
    return ReflexionModel(model=model, architecture=assignment,
                          report=report, quality=score)
