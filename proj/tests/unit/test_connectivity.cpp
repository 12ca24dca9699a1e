#include <doctest.h>

#include <random>

#include <wireforge/connectivity.hpp>
#include <wireforge/testkit/audits.hpp>
#include <wireforge/testkit/oracles.hpp>

using namespace wireforge;

namespace {

std::vector<Point3> wire_between(Point3 head, Point3 tail) {
    return {head, head + (tail - head) * (1.0 / 3), head + (tail - head) * (2.0 / 3), tail};
}

WireArt random_art(std::mt19937_64& rng, std::size_t n, int segments) {
    WireArt art;
    for (std::size_t w = 0; w < n; ++w) {
        std::vector<Point3> pts(3 * segments + 1);
        for (auto& p : pts) p = testkit::random_point(rng);
        art.add_wire(pts, static_cast<int>(w));
    }
    return art;
}

bool same_topology(const MstResult& a, const MstResult& b) {
    if (a.edges.size() != b.edges.size()) return false;
    for (std::size_t k = 0; k < a.edges.size(); ++k) {
        const auto &x = a.edges[k], &y = b.edges[k];
        if (x.i != y.i || x.j != y.j || x.end_i != y.end_i || x.end_j != y.end_j) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("endpoint_distance examples") {
    const auto a = wire_between({0, 0, 0}, {1, 0, 0});
    const auto b = wire_between({3, 0, 0}, {5, 0, 0});
    const auto e = endpoint_distance(a, b);
    CHECK(e.weight == 4.0);
    CHECK(e.end_i == End::Tail);
    CHECK(e.end_j == End::Head);
    CHECK(endpoint_distance(b, a).weight == e.weight);

    const auto c = wire_between({0, 0, 0}, {0, 2, 0});
    const auto shared = endpoint_distance(a, c);
    CHECK(shared.weight == 0.0);
    CHECK(shared.end_i == End::Head);
    CHECK(shared.end_j == End::Head);
}

TEST_CASE("endpoint_distance ties follow the listed order") {
    // All four combinations are equidistant.
    const auto a = wire_between({0, 0, 0}, {0, 0, 0});
    const auto b = wire_between({1, 0, 0}, {1, 0, 0});
    const auto e = endpoint_distance(a, b);
    CHECK(e.end_i == End::Head);
    CHECK(e.end_j == End::Head);
    // tail-head and head-tail tie; tail-head is listed first.
    const auto c = wire_between({0, 0, 0}, {2, 0, 0});
    const auto d = wire_between({3, 0, 0}, {-1, 0, 0});
    const auto f = endpoint_distance(c, d);
    CHECK(f.weight == 1.0);
    CHECK(f.end_i == End::Tail);
    CHECK(f.end_j == End::Head);
}

TEST_CASE("endpoint_distance matches the four-way oracle") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        std::vector<Point3> a(7), b(4);
        for (auto& p : a) p = testkit::random_point(rng);
        for (auto& p : b) p = testkit::random_point(rng);
        CHECK(endpoint_distance(a, b).weight == testkit::endpoint_weight_reference(a, b));
    }
}

TEST_CASE("WireGraph is symmetric with swapped endpoint roles") {
    std::mt19937_64 rng(2);
    const auto art = random_art(rng, 6, 2);
    const WireGraph g(art);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            if (i == j) continue;
            CHECK(g.weight(i, j) == g.weight(j, i));
            CHECK(g.pair(i, j).end_i == g.pair(j, i).end_j);
        }
    }
}

TEST_CASE("prim_mst small cases") {
    CHECK(prim_mst(WireGraph::from_weights(1, {0.0})).edges.empty());
    CHECK(prim_mst(WireGraph::from_weights(1, {0.0})).total_weight == 0.0);

    const auto two = prim_mst(WireGraph::from_weights(2, {0, 3, 3, 0}));
    REQUIRE(two.edges.size() == 1);
    CHECK(two.total_weight == 3.0);

    // Hand-built 4-vertex graph: the optimum is 0-1, 1-3, 3-2 with weight 1 + 2 + 1.
    const std::vector<double> w{0, 1, 5, 4,  //
                                1, 0, 6, 2,  //
                                5, 6, 0, 1,  //
                                4, 2, 1, 0};
    const auto four = prim_mst(WireGraph::from_weights(4, w));
    CHECK(four.total_weight == 4.0);
    CHECK(four.total_weight == testkit::brute_force_mst_weight(4, w));
}

TEST_CASE("equal weights give the star on vertex 0") {
    const std::size_t n = 6;
    std::vector<double> w(n * n, 2.0);
    const auto mst = prim_mst(WireGraph::from_weights(n, w));
    REQUIRE(mst.edges.size() == n - 1);
    for (const auto& e : mst.edges) CHECK(e.i == 0);
}

TEST_CASE("prim_mst equals the exhaustive minimum and is a spanning tree") {
    const auto audit = testkit::audit_mst_oracle(200, 7, 3);
    CHECK(audit.graphs == 200);
    CHECK(audit.mismatches == 0);
    CHECK(audit.not_spanning == 0);
}

TEST_CASE("prim_mst on random real weights") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 10);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 6;
        std::vector<double> w(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) w[i * n + j] = w[j * n + i] = u(rng);
        const auto mst = prim_mst(WireGraph::from_weights(n, w));
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        double sum = 0;
        for (const auto& e : mst.edges) {
            edges.emplace_back(e.i, e.j);
            sum += e.weight;
        }
        CHECK(testkit::is_spanning_tree(n, edges));
        CHECK(sum == mst.total_weight);
        CHECK(mst.total_weight == doctest::Approx(testkit::brute_force_mst_weight(n, w)).epsilon(1e-12));
    }
}

TEST_CASE("mst loss examples") {
    WireArt chain;
    chain.add_wire(wire_between({0, 0, 0}, {1, 0, 0}), 0);
    chain.add_wire(wire_between({1, 0, 0}, {1, 1, 0}), 1);
    chain.add_wire(wire_between({1, 1, 0}, {0, 1, 1}), 2);
    const auto touching = mst_loss_and_grad(chain);
    CHECK(touching.loss == 0.0);
    for (const auto& g : touching.grad) CHECK(g == Point3{});

    WireArt pair;
    const double d = 0.75;
    pair.add_wire(wire_between({-1, 0, 0}, {0, 0, 0}), 0);
    pair.add_wire(wire_between({d, 0, 0}, {2, 0, 0}), 1);
    const auto single = mst_loss_and_grad(pair);
    CHECK(single.loss == d * d);
    CHECK(single.grad[3] == Point3{-2 * d, 0, 0});
    CHECK(single.grad[4] == Point3{2 * d, 0, 0});
}

TEST_CASE("mst gradient matches finite differences and vanishes on interior points") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto art = random_art(rng, 5, 2);
        const auto res = mst_loss_and_grad(art);
        std::vector<bool> is_end(art.point_count(), false);
        for (std::size_t w = 0; w < art.wire_count(); ++w) {
            is_end[art.endpoints(w).first] = is_end[art.endpoints(w).second] = true;
        }
        for (std::size_t p = 0; p < art.point_count(); ++p) {
            if (!is_end[p]) {
                CHECK(res.grad[p] == Point3{});
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                auto f = [&](double v) {
                    WireArt copy = art;
                    copy.all_points()[p][c] = v;
                    return mst_loss_and_grad(copy).loss;
                };
                const double x = art.all_points()[p][c];
                // Skip draws where the step changes the tree or an argmin.
                WireArt lo = art, hi = art;
                lo.all_points()[p][c] = x - 1e-6;
                hi.all_points()[p][c] = x + 1e-6;
                if (!same_topology(mst_loss_and_grad(lo).tree, res.tree) ||
                    !same_topology(mst_loss_and_grad(hi).tree, res.tree))
                    continue;
                CHECK(std::abs(testkit::central_difference(f, x, 1e-6) - res.grad[p][c]) < 1e-6);
            }
        }
    }
}
