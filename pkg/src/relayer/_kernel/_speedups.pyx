# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernel.

Mirror of relayer._kernel._pure with identical arithmetic and iteration
order, so both implementations return bit-identical floats. Any change
here must be made in _pure.py as well (test_kernel.py enforces parity).
"""

IMPL = "speedups"

DEF MAX_CLUSTERS = 256


cdef inline int _ratio_cmp(double in_a, double out_a,
                           double in_b, double out_b) nogil:
    cdef bint a_inf = out_a == 0.0
    cdef bint b_inf = out_b == 0.0
    cdef double lhs, rhs
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


cdef double _layer_factor_c(int[:] membership, int n_clusters,
                            int max_layers) nogil:
    cdef int sizes[MAX_CLUSTERS]
    cdef Py_ssize_t n_units = membership.shape[0]
    cdef Py_ssize_t u
    cdef int c, placed = 0, threshold, counted = 0
    for c in range(n_clusters):
        sizes[c] = 0
    for u in range(n_units):
        c = membership[u]
        if c >= 0:
            sizes[c] += 1
            placed += 1
    threshold = (placed + 2 * max_layers - 1) // (2 * max_layers)
    for c in range(n_clusters):
        if sizes[c] >= threshold:
            counted += 1
    return <double>counted / <double>max_layers


cdef int _fill_layers(int[:] membership, int n_clusters,
                      int[:] edge_src, int[:] edge_dst, double[:] edge_weight,
                      bint reorder, int* layers) except -1:
    cdef double in_w[MAX_CLUSTERS]
    cdef double out_w[MAX_CLUSTERS]
    cdef int size[MAX_CLUSTERS]
    cdef int min_unit[MAX_CLUSTERS]
    cdef int order[MAX_CLUSTERS]
    cdef Py_ssize_t n_units = membership.shape[0]
    cdef Py_ssize_t n_edges = edge_src.shape[0]
    cdef Py_ssize_t u, e
    cdef int c, cs, ct, i, j, tmp, cmp_, pos
    cdef bint before

    if n_clusters > MAX_CLUSTERS:
        raise ValueError(f"more than {MAX_CLUSTERS} clusters unsupported")

    if not reorder:
        for c in range(n_clusters):
            layers[c] = c + 1
        return 0

    for c in range(n_clusters):
        in_w[c] = 0.0
        out_w[c] = 0.0
        size[c] = 0
        min_unit[c] = <int>n_units

    for u in range(n_units):
        c = membership[u]
        if c >= 0:
            size[c] += 1
            if <int>u < min_unit[c]:
                min_unit[c] = <int>u

    for e in range(n_edges):
        cs = membership[edge_src[e]]
        ct = membership[edge_dst[e]]
        if cs < 0 or ct < 0 or cs == ct:
            continue
        out_w[cs] += edge_weight[e]
        in_w[ct] += edge_weight[e]

    for c in range(n_clusters):
        order[c] = c

    for i in range(1, n_clusters):
        j = i
        while j > 0:
            cs = order[j]
            ct = order[j - 1]
            cmp_ = _ratio_cmp(in_w[cs], out_w[cs], in_w[ct], out_w[ct])
            if cmp_ != 0:
                before = cmp_ > 0
            elif size[cs] != size[ct]:
                before = size[cs] > size[ct]
            else:
                before = min_unit[cs] < min_unit[ct]
            if not before:
                break
            tmp = order[j]
            order[j] = order[j - 1]
            order[j - 1] = tmp
            j -= 1

    for pos in range(n_clusters):
        layers[order[pos]] = pos + 1
    return 0


def evaluate_detail(int[:] membership, int n_clusters,
                    int[:] edge_src, int[:] edge_dst, double[:] edge_weight,
                    signed char[:] edge_resolvable, int max_layers,
                    double factor_resolvable, double factor_unresolvable,
                    double cohesion_floor, bint reorder):
    """Full scoring: (value, cohesion, coupling, layer_factor, layers)."""
    cdef int layers[MAX_CLUSTERS]
    cdef Py_ssize_t n_edges = edge_src.shape[0]
    cdef Py_ssize_t e
    cdef int cs, ct
    cdef double cohesion = 0.0
    cdef double coupling = 0.0
    cdef double layer_factor, coh_eff, denom, value

    _fill_layers(membership, n_clusters, edge_src, edge_dst, edge_weight,
                 reorder, layers)

    for e in range(n_edges):
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

    layer_factor = _layer_factor_c(membership, n_clusters, max_layers)
    coh_eff = cohesion if cohesion > cohesion_floor else cohesion_floor
    denom = coh_eff + coupling
    if denom > 0.0:
        value = (coh_eff / denom) * layer_factor
    else:
        value = layer_factor
    return (value, cohesion, coupling, layer_factor,
            [layers[c] for c in range(n_clusters)])


def evaluate(int[:] membership, int n_clusters,
             int[:] edge_src, int[:] edge_dst, double[:] edge_weight,
             signed char[:] edge_resolvable, int max_layers,
             double factor_resolvable, double factor_unresolvable,
             double cohesion_floor, bint reorder):
    """Score only; the hot path for search loops."""
    cdef int layers[MAX_CLUSTERS]
    cdef Py_ssize_t n_edges = edge_src.shape[0]
    cdef Py_ssize_t e
    cdef int cs, ct
    cdef double cohesion = 0.0
    cdef double coupling = 0.0
    cdef double layer_factor, coh_eff, denom

    _fill_layers(membership, n_clusters, edge_src, edge_dst, edge_weight,
                 reorder, layers)

    for e in range(n_edges):
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

    layer_factor = _layer_factor_c(membership, n_clusters, max_layers)
    coh_eff = cohesion if cohesion > cohesion_floor else cohesion_floor
    denom = coh_eff + coupling
    if denom > 0.0:
        return (coh_eff / denom) * layer_factor
    return layer_factor
