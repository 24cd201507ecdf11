#include <doctest.h>

#include "flipwalk/decomposition.hpp"
#include "flipwalk/error.hpp"

#include <set>

using namespace flipwalk;

namespace {
BigCount ul(std::size_t x) { return BigCount(static_cast<unsigned long>(x)); }
}  // namespace

TEST_CASE("oriented partition of the heptagon") {
    auto g = build_flip_graph(3, 5);
    auto p = oriented_partition(g);
    REQUIRE(p.classes.size() == 5);
    std::size_t total = 0;
    for (const auto& c : p.classes) {
        int l = c.factors[0].n, r = c.factors[1].n;
        CHECK(l + r == 4);
        CHECK(ul(c.size()) == catalan(l) * catalan(r));
        total += c.size();
    }
    CHECK(total == 42);
    verify_cartesian_structure(p);
    // the apex really is the third corner of the triangle on (m-1, 0)
    for (std::size_t v = 0; v < g.size(); ++v) {
        int a = p.classes[p.vertex_class[v]].apex;
        const auto& t = g.vertices[v];
        CHECK((a == 1 || t.has_diagonal(0, a)));
        CHECK((a == g.m - 2 || t.has_diagonal(a, g.m - 1)));
    }
}

TEST_CASE("oriented partition of the square") {
    auto g = build_flip_graph(3, 2);
    auto p = oriented_partition(g);
    REQUIRE(p.classes.size() == 2);
    CHECK(p.classes[0].size() == 1);
    CHECK(p.classes[1].size() == 1);
    auto ms = boundary_matchings(p);
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].edges.size() == 1);
    auto rep = verify_matching_inequality(p);
    CHECK(rep.pairs_checked == 1);
    CHECK(rep.max_slack == Rational(1, 2));
    auto bp = boundary_projection(p, 0, 1);
    CHECK(bp.verified);
    CHECK(bp.sub_class_size == 1);
}

TEST_CASE("oriented matchings have triple Catalan size") {
    for (int n = 2; n <= 7; ++n) {
        auto g = build_flip_graph(3, n);
        auto p = oriented_partition(g);
        auto ms = boundary_matchings(p);
        CHECK(ms.size() == static_cast<std::size_t>(n * (n - 1) / 2));
        verify_edge_classification(p, ms);
        for (const auto& bm : ms) {
            int a = p.classes[bm.class_a].apex, b = p.classes[bm.class_b].apex;
            CHECK(ul(bm.edges.size()) == oriented_matching_size(n, a, b));
            CHECK(bm.boundary_a.size() == bm.edges.size());
            for (auto [x, y] : bm.edges) CHECK(g.graph.arc_index(x, y) < g.graph.num_arcs());
        }
        for (int a = 1; a <= n; ++a) CHECK(ul(p.classes[a - 1].size()) == oriented_class_size(n, a));
    }
}

TEST_CASE("matching inequality") {
    auto g = build_flip_graph(3, 5);
    auto p = oriented_partition(g);
    auto r = verify_matching_inequality(p);
    CHECK(r.pairs_checked == 10);
    CHECK(r.max_slack <= 1);
    auto c = verify_matching_inequality_closed_form(5);
    CHECK(c.max_slack == r.max_slack);
    for (int n = 3; n <= 14; ++n) {
        auto q = verify_matching_inequality_closed_form(n);
        // the extreme pair is the two outermost apexes
        CHECK(q.worst_a == 1);
        CHECK(q.worst_b == n);
        Rational expect(catalan(n - 1) * catalan(n - 1), catalan(n - 2) * catalan(n));
        expect.canonicalize();
        CHECK(q.max_slack == expect);
        CHECK(q.max_slack <= 1);
    }
}

TEST_CASE("boundary projection") {
    auto g = build_flip_graph(3, 5);
    auto p = oriented_partition(g);
    for (std::uint32_t a = 0; a < 5; ++a)
        for (std::uint32_t b = 0; b < 5; ++b) {
            if (a == b) continue;
            auto r = boundary_projection(p, a, b);
            CHECK(r.verified);
            // moving right keeps the left factor and recurses in the right sub-polygon
            CHECK(r.factor_index == (b > a ? 1 : 0));
        }
    auto g2 = build_flip_graph(3, 2);
    auto p2 = oriented_partition(g2);
    CHECK(boundary_projection(p2, 1, 0).sub_class_size == 1);
    CHECK_THROWS_AS(boundary_projection(p, 1, 1), Error);
}

TEST_CASE("perturbed center rule") {
    // odd polygon: no diameters
    CHECK(contains_perturbed_center(7, {0, 2, 4}));
    CHECK(!contains_perturbed_center(7, {0, 1, 2}));
    // square: diagonal 0-2 is a diameter; the midpoint of edge (0,1) lies on the 0..2 side
    CHECK(contains_perturbed_center(4, {0, 1, 2}));
    CHECK(!contains_perturbed_center(4, {0, 2, 3}));
    CHECK(contains_perturbed_center(4, {0, 1, 3}));
    CHECK(!contains_perturbed_center(4, {1, 2, 3}));
}

TEST_CASE("central partition of the heptagon") {
    auto g = build_flip_graph(3, 5);
    auto p = central_partition(g);
    std::size_t total = 0;
    for (const auto& c : p.classes) total += c.size();
    CHECK(total == 42);
    // rotations of the (2,2,3) and (1,3,3) triangles
    CHECK(p.classes.size() == 14);
    for (const auto& c : p.classes) {
        std::multiset<int> arcs;
        for (const auto& f : c.factors) arcs.insert(f.span);
        CHECK((arcs == std::multiset<int>{2, 2, 3} || arcs == std::multiset<int>{1, 3, 3}));
    }
    verify_cartesian_structure(p);
    auto ms = boundary_matchings(p);
    verify_edge_classification(p, ms);
}

TEST_CASE("central partitions for even polygons and k = 4") {
    for (auto [k, n] : std::vector<std::pair<int, int>>{{3, 4}, {3, 6}, {3, 8}, {4, 3}, {4, 4}, {4, 5}, {5, 3}}) {
        auto g = build_flip_graph(k, n);
        auto p = central_partition(g);
        std::size_t total = 0;
        for (const auto& c : p.classes) {
            total += c.size();
            BigCount prod = 1;
            int sum = 0;
            for (const auto& f : c.factors) {
                prod *= fuss_catalan(k, f.n);
                sum += f.n;
                CHECK(2 * f.n <= n);
            }
            CHECK(sum == n - 1);
            CHECK(ul(c.size()) == prod);
        }
        CHECK(total == g.size());
        verify_cartesian_structure(p);
        auto ms = boundary_matchings(p);
        verify_edge_classification(p, ms);

        // class-level oracle from polygon geometry only
        auto cl = central_class_structure(k, n);
        REQUIRE(cl.polygons.size() == p.classes.size());
        for (std::size_t i = 0; i < cl.polygons.size(); ++i) {
            CHECK(cl.polygons[i] == p.classes[i].polygon);
            CHECK(cl.sizes[i] == ul(p.classes[i].size()));
        }
        for (const auto& bm : ms) {
            auto it = cl.edges.find({bm.class_a, bm.class_b});
            BigCount expect = it == cl.edges.end() ? BigCount(0) : it->second;
            CHECK(ul(bm.edges.size()) == expect);
            auto jt = cl.edges.find({bm.class_b, bm.class_a});
            CHECK((jt == cl.edges.end() ? BigCount(0) : jt->second) == expect);
        }
    }
}

TEST_CASE("central class level counts sum to the vertex count") {
    for (int n = 5; n <= 30; ++n) {
        auto cl = central_class_structure(3, n);
        BigCount s = 0;
        for (auto& x : cl.sizes) s += x;
        CHECK(s == catalan(n));
    }
    auto q = central_class_structure(4, 6);
    BigCount s = 0;
    for (auto& x : q.sizes) s += x;
    CHECK(s == fuss_catalan(4, 6));
}

TEST_CASE("partition json") {
    auto g = build_flip_graph(3, 4);
    auto p = oriented_partition(g);
    auto ms = boundary_matchings(p);
    auto j = to_json(p, ms);
    CHECK(j["classes"].size() == 4);
    CHECK(j["matchings"].size() == 6);
    CHECK(!j["matchings"][0].contains("edges"));
    CHECK(to_json(p, ms, true)["matchings"][0].contains("edges"));
}
