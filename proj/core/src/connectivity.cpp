#include "wireforge/connectivity.hpp"

#include <limits>

#include "wireforge/errors.hpp"

namespace wireforge {

EndpointPair endpoint_distance(std::span<const Point3> wire_i, std::span<const Point3> wire_j, std::size_t i,
                               std::size_t j) {
    if (wire_i.empty() || wire_j.empty()) throw ContractError("endpoint_distance on an empty wire");
    const Point3 hi = wire_i.front(), ti = wire_i.back();
    const Point3 hj = wire_j.front(), tj = wire_j.back();
    const struct {
        End a, b;
        double w;
    } combos[4] = {
        {End::Head, End::Head, squared_norm(hi - hj)},
        {End::Tail, End::Head, squared_norm(ti - hj)},
        {End::Tail, End::Tail, squared_norm(ti - tj)},
        {End::Head, End::Tail, squared_norm(hi - tj)},
    };
    int best = 0;
    for (int k = 1; k < 4; ++k)
        if (combos[k].w < combos[best].w) best = k;
    return {i, j, combos[best].a, combos[best].b, combos[best].w};
}

WireGraph::WireGraph(const WireArt& art) : n_(art.wire_count()), pairs_(n_ * n_) {
    for (std::size_t i = 0; i < n_; ++i) {
        pairs_[i * n_ + i] = {i, i, End::Head, End::Head, 0.0};
        for (std::size_t j = i + 1; j < n_; ++j) {
            const auto p = endpoint_distance(art.wire_points(i), art.wire_points(j), i, j);
            pairs_[i * n_ + j] = p;
            pairs_[j * n_ + i] = {j, i, p.end_j, p.end_i, p.weight};
        }
    }
}

WireGraph WireGraph::from_weights(std::size_t n, const std::vector<double>& row_major) {
    if (row_major.size() != n * n) throw ContractError("weight matrix must be n*n");
    WireGraph g;
    g.n_ = n;
    g.pairs_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            g.pairs_[i * n + j] = {i, j, End::Head, End::Head, i == j ? 0.0 : row_major[i * n + j]};
    return g;
}

MstResult prim_mst(const WireGraph& graph) {
    const std::size_t n = graph.size();
    MstResult out;
    if (n <= 1) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<bool> in_tree(n, false);
    std::vector<double> key(n, inf);
    std::vector<std::size_t> parent(n, 0);

    in_tree[0] = true;
    for (std::size_t v = 1; v < n; ++v) {
        key[v] = graph.weight(0, v);
        parent[v] = 0;
    }
    out.edges.reserve(n - 1);
    for (std::size_t added = 1; added < n; ++added) {
        std::size_t next = n;
        for (std::size_t v = 1; v < n; ++v)
            if (!in_tree[v] && (next == n || key[v] < key[next])) next = v;
        in_tree[next] = true;
        const auto& e = graph.pair(parent[next], next);
        out.edges.push_back(e);
        out.total_weight += e.weight;
        for (std::size_t v = 1; v < n; ++v) {
            if (in_tree[v]) continue;
            const double w = graph.weight(next, v);
            if (w < key[v]) {
                key[v] = w;
                parent[v] = next;
            }
        }
    }
    return out;
}

MstLoss mst_loss_and_grad(const WireArt& art) {
    if (art.wire_count() == 0) throw ContractError("MST loss needs at least one wire");
    MstLoss out;
    out.grad.assign(art.point_count(), Point3{});
    out.tree = prim_mst(WireGraph(art));
    out.loss = out.tree.total_weight;
    const auto pts = art.all_points();
    for (const auto& e : out.tree.edges) {
        const auto [hi, ti] = art.endpoints(e.i);
        const auto [hj, tj] = art.endpoints(e.j);
        const std::size_t a = e.end_i == End::Head ? hi : ti;
        const std::size_t b = e.end_j == End::Head ? hj : tj;
        const Point3 d = pts[a] - pts[b];
        out.grad[a] += 2.0 * d;
        out.grad[b] -= 2.0 * d;
    }
    return out;
}

}  // namespace wireforge
