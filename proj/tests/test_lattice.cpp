#include <doctest.h>

#include "flipwalk/error.hpp"
#include "flipwalk/lattice.hpp"
#include "flipwalk/spectral.hpp"

#include <algorithm>
#include <set>

using namespace flipwalk;

namespace {

std::size_t symmetric_difference(const LatticeTriangulation& a, const LatticeTriangulation& b) {
    std::vector<Segment> d;
    std::set_symmetric_difference(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(), std::back_inserter(d));
    return d.size();
}

bool contains_all(const LatticeTriangulation& t, const std::vector<Segment>& fixed) {
    for (auto [a, b] : fixed)
        if (!t.has_edge(a, b)) return false;
    return true;
}

}  // namespace

TEST_CASE("small grids") {
    auto g1 = enumerate_lattice(1);
    CHECK(g1.size() == 1);
    CHECK(g1.vertices[0].edges.empty());
    CHECK(g1.graph.num_edges() == 0);

    auto g2 = enumerate_lattice(2);
    CHECK(g2.size() == 2);
    CHECK(g2.graph.num_edges() == 1);
    for (const auto& t : g2.vertices) {
        CHECK(flips_lattice(t).size() == 1);
        CHECK(t.triangle_count() == 2);
    }
    CHECK_THROWS_AS(enumerate_lattice(5), Error);
    CHECK_THROWS_AS(enumerate_lattice(0), Error);
}

TEST_CASE("two oracles agree on the 3x3 grid") {
    auto g = enumerate_lattice(3);
    auto direct = enumerate_lattice_direct(3);
    CHECK(g.vertices == direct);
    CHECK(g.size() == 64);
    CHECK(g.graph.connected());
    // flip edges are exactly the pairs differing in one segment
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < direct.size(); ++i)
        for (std::size_t j = i + 1; j < direct.size(); ++j)
            if (symmetric_difference(direct[i], direct[j]) == 2) {
                ++pairs;
                CHECK(g.graph.arc_index(i, j) != g.graph.num_arcs());
            }
    CHECK(pairs == g.graph.num_edges());
    for (const auto& t : g.vertices) {
        CHECK(t.triangle_count() == 8);
        CHECK(t.edges.size() == lattice_edge_count(3));
    }
    auto canon = canonical_lattice(3);
    std::size_t nb = 0;
    for (const auto& t : direct)
        if (symmetric_difference(t, canon) == 2) ++nb;
    CHECK(flips_lattice(canon).size() == nb);
}

TEST_CASE("reflex quadrilaterals do not flip") {
    auto g = enumerate_lattice(3);
    std::set<std::string> all;
    for (const auto& t : g.vertices) all.insert(t.key());
    std::size_t reflex = 0;
    for (const auto& t : g.vertices) {
        auto fl = flips_lattice(t);
        std::set<Segment> removed;
        for (const auto& f : fl) removed.insert(f.removed);
        for (const auto& e : t.edges) {
            if (removed.count(e)) continue;
            // no replacement segment completes a triangulation
            for (int a = 0; a < 9; ++a)
                for (int b = a + 1; b < 9; ++b) {
                    if (t.has_edge(a, b)) continue;
                    LatticeTriangulation u = t;
                    u.edges.erase(std::find(u.edges.begin(), u.edges.end(), e));
                    u.edges.push_back({a, b});
                    std::sort(u.edges.begin(), u.edges.end());
                    CHECK(all.count(u.key()) == 0);
                }
            Segment s = e;
            bool hull = (s.first % 3 == s.second % 3 && (s.first % 3 == 0 || s.first % 3 == 2)) ||
                        (s.first / 3 == s.second / 3 && (s.first / 3 == 0 || s.first / 3 == 2));
            if (!hull) ++reflex;
        }
    }
    CHECK(reflex > 0);
}

TEST_CASE("the 4x4 grid") {
    auto g = enumerate_lattice(4);
    auto direct = enumerate_lattice_direct(4);
    CHECK(g.size() == direct.size());
    CHECK(g.vertices == direct);
    CHECK(g.graph.connected());
    CHECK(g.vertices.front().triangle_count() == 18);
}

TEST_CASE("product subgraph") {
    auto p = product_subgraph(4, 2);
    CHECK(p.product_verified);
    CHECK(p.h.size() == 16);
    CHECK(p.block_graph.size() == 2);
    auto lab = hypercube_labelling(p.h.graph);
    REQUIRE(lab.has_value());
    CHECK(std::set<std::uint32_t>(lab->begin(), lab->end()).size() == 16);
    // expansion of the product against its factors
    auto hq = brute_force_expansion(p.h.graph).ratio;
    auto hb = brute_force_expansion(p.block_graph.graph).ratio;
    CHECK(hq == 1);
    CHECK(2 * hq >= hb);

    // H is the induced subgraph of the full graph on the constrained triangulations
    auto full = enumerate_lattice(4);
    auto fixed = product_constraint(4, 2);
    std::vector<std::uint32_t> members;
    for (std::uint32_t v = 0; v < full.size(); ++v)
        if (contains_all(full.vertices[v], fixed)) members.push_back(v);
    REQUIRE(members.size() == p.h.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        CHECK(full.vertices[members[i]] == p.h.vertices[i]);
        for (std::size_t j = 0; j < members.size(); ++j) {
            bool in_full = full.graph.arc_index(members[i], members[j]) != full.graph.num_arcs();
            bool in_h = p.h.graph.arc_index(i, j) != p.h.graph.num_arcs();
            CHECK(in_full == in_h);
        }
    }
    // constrained flips never leave H
    for (const auto& t : p.h.vertices)
        for (const auto& f : flips_lattice(t, fixed)) CHECK(p.h.index_of(f.result) != p.h.size());

    auto whole = product_subgraph(3, 3);
    CHECK(whole.h.size() == 64);
    CHECK(whole.product_verified);
    CHECK_THROWS_AS(product_subgraph(4, 3), Error);
}

TEST_CASE("hypercube labelling rejects non-cubes") {
    CHECK_FALSE(hypercube_labelling(Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}})).has_value());
    CHECK(hypercube_labelling(Graph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})).has_value());
    CHECK_FALSE(hypercube_labelling(enumerate_lattice(3).graph).has_value());
}

TEST_CASE("lattice exports") {
    auto g = enumerate_lattice(2);
    auto j = to_json(g);
    CHECK(j["n"] == 2);
    CHECK(j["vertices"].size() == 2);
    CHECK(j["edges"].size() == 1);
    CHECK(j["vertices"][0].size() == 5);
    auto dot = to_dot(g);
    CHECK(dot.rfind("graph F_2 {", 0) == 0);
    CHECK(dot.find("0 -- 1;") != std::string::npos);
}
