"""Unit-level dependency graph derived from a code model.

Edges aggregate all inter-unit references for one ordered unit pair and
carry a coupling weight: the number of distinct (from_member, to_member,
kind) triples, insensitive to occurrence counts. Intra-unit references
never form edges but stay retrievable for cohesion bookkeeping.
References to external units are dropped entirely: they carry no weight
and can never violate a layering.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CodeModel, Reference


@dataclass(frozen=True)
class DependencyEdge:
    from_unit: str
    to_unit: str
    weight: float
    # (from_member_name, Reference) pairs, in canonical order
    contributing_refs: tuple[tuple[str, Reference], ...]


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[str, ...]  # unit names, sorted
    edges: tuple[DependencyEdge, ...]  # sorted by (from_unit, to_unit)
    # intra-unit references: (unit, member, Reference), canonical order
    intra_unit_refs: tuple[tuple[str, str, Reference], ...]

    def edge(self, from_unit: str, to_unit: str) -> DependencyEdge | None:
        for e in self.edges:
            if e.from_unit == from_unit and e.to_unit == to_unit:
                return e
        return None


def cbo_weight(refs) -> int:
    """Coupling weight of one ordered unit pair: distinct
    (from_member, to_member, kind) triples among the contributing
    references. Occurrence counts do not inflate the weight."""
    triples = {(member, r.to_member, r.kind) for member, r in refs}
    return len(triples)


def unit_dependency_graph(model: CodeModel) -> DependencyGraph:
    """Derive the unit digraph: one edge per ordered unit pair with at
    least one internal inter-unit reference."""
    by_pair: dict[tuple[str, str], list[tuple[str, Reference]]] = {}
    intra: list[tuple[str, str, Reference]] = []
    for u in model.units:
        for m in u.members:
            for r in m.references:
                if r.external:
                    continue
                if r.to_unit == u.name:
                    intra.append((u.name, m.name, r))
                else:
                    by_pair.setdefault((u.name, r.to_unit), []).append((m.name, r))

    edges = []
    for (src, dst) in sorted(by_pair):
        refs = sorted(by_pair[(src, dst)],
                      key=lambda mr: (mr[0],) + mr[1].sort_key())
        edges.append(DependencyEdge(
            from_unit=src, to_unit=dst,
            weight=cbo_weight(refs),
            contributing_refs=tuple(refs)))

    return DependencyGraph(
        nodes=tuple(sorted(u.name for u in model.units)),
        edges=tuple(edges),
        intra_unit_refs=tuple(sorted(
            intra, key=lambda t: (t[0], t[1]) + t[2].sort_key())),
    )


def to_dot(graph: DependencyGraph, assessment=None) -> str:
    """DOT rendering with edges labeled w=<weight>.

    When an edge assessment (from relayer.quality.assess_edges) is
    given, violating edges are colored: red for unresolvable, orange for
    resolvable.
    """
    colors = {}
    if assessment is not None:
        for item in assessment.edges:
            if item.violating:
                colors[(item.edge.from_unit, item.edge.to_unit)] = (
                    "orange" if item.resolvable else "red")
    lines = ["digraph dependencies {"]
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for e in graph.edges:
        attrs = [f'label="w={e.weight:g}"']
        color = colors.get((e.from_unit, e.to_unit))
        if color:
            attrs.append(f'color="{color}"')
        lines.append(f'  "{e.from_unit}" -> "{e.to_unit}" [{", ".join(attrs)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
