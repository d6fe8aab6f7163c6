"""Pure-Python scoring kernel.

This is the reference implementation; relayer._kernel._speedups is a
compiled twin that must produce bit-identical results (same arithmetic,
same iteration order). Keep the two in lockstep.

Inputs are flat arrays describing the unit digraph:

* ``membership[u]`` -- cluster id of unit ``u`` (units are indexed by
  lexicographic name rank), or -1 when the unit is not placed (partial
  assignments during greedy seeding). Cluster ids must be 0..n_clusters-1
  and every cluster must contain at least one placed unit.
* ``edge_src`` / ``edge_dst`` -- unit indices per edge.
* ``edge_weight`` -- coupling weight per edge.
* ``edge_resolvable`` -- 1 when every contributing reference of the edge
  could be eliminated by a transformation, else 0.

When ``reorder`` is true, clusters are ranked bottom-up by the ratio of
incoming to outgoing inter-cluster weight (descending; a cluster with no
outgoing weight is a pure sink and ranks bottom-most), ties broken by
larger size then smallest contained unit index. When false, cluster id
``c`` is taken to already mean layer ``c + 1``.

The score of an assignment is
``cohesion / (cohesion + coupling) * counted_layers / max_layers``
where cohesion sums intra-layer edge weights and coupling sums
inter-layer edge weights scaled by 1.0 (downward or same layer after
ordering), ``factor_resolvable`` (upward, resolvable) or
``factor_unresolvable`` (upward, unresolvable). With no edge weight at
all the score degenerates to the layer factor alone.

``counted_layers`` ignores token layers: a layer earns the reward only
when it holds at least ceil(placed_units / (2 * max_layers)) units
(half an average layer). Without this gate the best "three layer"
solution is always one giant layer plus two single-unit layers, which
hollows the layer reward out entirely. Systems small enough for the
threshold to be 1 (up to twice max_layers) are unaffected.
"""

from __future__ import annotations

IMPL = "pure"


def _ratio_cmp(in_a, out_a, in_b, out_b):
    """Compare in/out ratios without dividing; out == 0 means +inf."""
    a_inf = out_a == 0.0
    b_inf = out_b == 0.0
    if a_inf and b_inf:
        return 0
    if a_inf:
        return 1
    if b_inf:
        return -1
    lhs = in_a * out_b
    rhs = in_b * out_a
    if lhs > rhs:
        return 1
    if lhs < rhs:
        return -1
    return 0


def _cluster_layers(membership, n_clusters, edge_src, edge_dst, edge_weight,
                    reorder):
    """Layer index (1 = bottom) per cluster id."""
    if not reorder:
        return list(range(1, n_clusters + 1))

    in_w = [0.0] * n_clusters
    out_w = [0.0] * n_clusters
    size = [0] * n_clusters
    min_unit = [len(membership)] * n_clusters

    for u, c in enumerate(membership):
        if c >= 0:
            size[c] += 1
            if u < min_unit[c]:
                min_unit[c] = u

    for e in range(len(edge_src)):
        cs = membership[edge_src[e]]
        ct = membership[edge_dst[e]]
        if cs < 0 or ct < 0 or cs == ct:
            continue
        out_w[cs] += edge_weight[e]
        in_w[ct] += edge_weight[e]

    def precedes(a, b):
        c = _ratio_cmp(in_w[a], out_w[a], in_w[b], out_w[b])
        if c != 0:
            return c > 0
        if size[a] != size[b]:
            return size[a] > size[b]
        return min_unit[a] < min_unit[b]

    order = list(range(n_clusters))
    for i in range(1, n_clusters):
        j = i
        while j > 0 and precedes(order[j], order[j - 1]):
            order[j], order[j - 1] = order[j - 1], order[j]
            j -= 1

    layers = [0] * n_clusters
    for pos, c in enumerate(order):
        layers[c] = pos + 1
    return layers


def _layer_factor(membership, n_clusters, max_layers):
    """Fraction of the layer budget filled by non-token layers."""
    sizes = [0] * n_clusters
    placed = 0
    for c in membership:
        if c >= 0:
            sizes[c] += 1
            placed += 1
    threshold = -(-placed // (2 * max_layers))  # ceil
    counted = 0
    for c in range(n_clusters):
        if sizes[c] >= threshold:
            counted += 1
    return float(counted) / float(max_layers)


def evaluate_detail(membership, n_clusters, edge_src, edge_dst, edge_weight,
                    edge_resolvable, max_layers, factor_resolvable,
                    factor_unresolvable, cohesion_floor, reorder):
    """Full scoring: (value, cohesion, coupling, layer_factor, layers)."""
    layers = _cluster_layers(membership, n_clusters, edge_src, edge_dst,
                             edge_weight, reorder)
    cohesion = 0.0
    coupling = 0.0
    for e in range(len(edge_src)):
        cs = membership[edge_src[e]]
        ct = membership[edge_dst[e]]
        if cs < 0 or ct < 0:
            continue
        if cs == ct:
            cohesion += edge_weight[e]
        elif layers[cs] < layers[ct]:
            if edge_resolvable[e]:
                coupling += edge_weight[e] * factor_resolvable
            else:
                coupling += edge_weight[e] * factor_unresolvable
        else:
            coupling += edge_weight[e]

    layer_factor = _layer_factor(membership, n_clusters, max_layers)
    coh_eff = cohesion if cohesion > cohesion_floor else cohesion_floor
    denom = coh_eff + coupling
    if denom > 0.0:
        value = (coh_eff / denom) * layer_factor
    else:
        value = layer_factor
    return value, cohesion, coupling, layer_factor, layers


def evaluate(membership, n_clusters, edge_src, edge_dst, edge_weight,
             edge_resolvable, max_layers, factor_resolvable,
             factor_unresolvable, cohesion_floor, reorder):
    """Score only; the hot path for search loops."""
    return evaluate_detail(membership, n_clusters, edge_src, edge_dst,
                           edge_weight, edge_resolvable, max_layers,
                           factor_resolvable, factor_unresolvable,
                           cohesion_floor, reorder)[0]
