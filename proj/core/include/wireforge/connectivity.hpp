#pragma once

#include <cstddef>
#include <vector>

#include "wireforge/geometry.hpp"

namespace wireforge {

enum class End { Head = 0, Tail = 1 };

/// Closest endpoint combination between two wires. Weight is a squared distance.
struct EndpointPair {
    std::size_t i = 0;
    std::size_t j = 0;
    End end_i = End::Head;
    End end_j = End::Head;
    double weight = 0;

    friend bool operator==(const EndpointPair&, const EndpointPair&) = default;
};

/// min over (head,head), (tail,head), (tail,tail), (head,tail) of squared
/// endpoint distances; ties resolve to the earliest combination in that order.
EndpointPair endpoint_distance(std::span<const Point3> wire_i, std::span<const Point3> wire_j,
                               std::size_t i = 0, std::size_t j = 1);

/// Complete graph over wires with EndpointPair edges.
class WireGraph {
public:
    WireGraph() = default;
    explicit WireGraph(const WireArt& art);
    /// Arbitrary symmetric weights (diagonal ignored); endpoints are reported as Head/Head.
    static WireGraph from_weights(std::size_t n, const std::vector<double>& row_major);

    std::size_t size() const { return n_; }
    double weight(std::size_t i, std::size_t j) const { return pairs_[i * n_ + j].weight; }
    const EndpointPair& pair(std::size_t i, std::size_t j) const { return pairs_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<EndpointPair> pairs_;
};

struct MstResult {
    /// Edge e connects parent i to child j, in insertion order.
    std::vector<EndpointPair> edges;
    double total_weight = 0;
};

/// Dense array-based Prim starting at vertex 0; ties go to the smaller vertex index.
MstResult prim_mst(const WireGraph& graph);

struct MstLoss {
    double loss = 0;
    /// One entry per control point of the art; non-zero only on wire endpoints.
    std::vector<Point3> grad;
    MstResult tree;
};

/// L = total MST weight; each tree edge (a, b) adds 2(a-b) to a and 2(b-a) to b,
/// with topology and endpoint choices frozen.
MstLoss mst_loss_and_grad(const WireArt& art);

}  // namespace wireforge
