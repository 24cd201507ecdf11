#include "flipwalk/decomposition.hpp"
#include "flipwalk/error.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace flipwalk {

namespace {

std::shared_ptr<const FlipGraph> cached_factor(ClassPartition& p, int k, int n) {
    auto& slot = p.factor_graphs[{k, n}];
    if (!slot) slot = std::make_shared<const FlipGraph>(build_flip_graph(k, n));
    return slot;
}

// fills coordinates, orders members row-major and checks the product cardinality
void finish_partition(ClassPartition& p) {
    const FlipGraph& g = *p.graph;
    p.coords.assign(g.size(), {});
    for (auto& c : p.classes)
        for (auto& f : c.factors) cached_factor(p, f.k, f.n);
    for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& cls = p.classes[p.vertex_class[v]];
        std::vector<std::uint32_t> c;
        for (const auto& f : cls.factors) {
            const FlipGraph& fg = p.factor_graph(f);
            std::size_t idx = fg.index_of(restrict_to(g.vertices[v], f));
            if (idx == fg.size()) throw Error(ErrorKind::StructureMismatch, "factor state missing");
            c.push_back(static_cast<std::uint32_t>(idx));
        }
        p.coords[v] = std::move(c);
    }
    for (std::uint32_t ci = 0; ci < p.classes.size(); ++ci) {
        auto& cls = p.classes[ci];
        std::sort(cls.members.begin(), cls.members.end(),
                  [&](std::uint32_t x, std::uint32_t y) { return p.coords[x] < p.coords[y]; });
        std::size_t expect = 1;
        for (const auto& f : cls.factors) expect *= p.factor_graph(f).size();
        if (expect != cls.members.size())
            throw Error(ErrorKind::StructureMismatch, "class size differs from factor product");
        for (std::size_t i = 0; i < cls.members.size(); ++i)
            if (p.member_position(ci, p.coords[cls.members[i]]) != i)
                throw Error(ErrorKind::StructureMismatch, "class coordinates are not a full product");
    }
}

}  // namespace

std::size_t ClassPartition::member_position(std::uint32_t cls, const std::vector<std::uint32_t>& c) const {
    const auto& fs = classes[cls].factors;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) pos = pos * factor_graph(fs[i]).size() + c[i];
    return pos;
}

KAngulation restrict_to(const KAngulation& t, const Factor& f) {
    std::vector<Diagonal> ds;
    for (auto d : t.diagonals) {
        int ra = (d.a - f.start + t.m) % t.m, rb = (d.b - f.start + t.m) % t.m;
        if (ra > f.span || rb > f.span) continue;
        if (std::min(ra, rb) == 0 && std::max(ra, rb) == f.span) continue;
        ds.push_back({std::min(ra, rb), std::max(ra, rb)});
    }
    return make_kangulation(t.k, f.span + 1, std::move(ds));
}

int oriented_apex(const KAngulation& t) {
    if (t.k != 3) throw Error(ErrorKind::InvalidParameter, "oriented partition needs k = 3");
    for (int a = 1; a < t.m - 1; ++a) {
        bool left = a == 1 || t.has_diagonal(0, a);
        bool right = a == t.m - 2 || t.has_diagonal(a, t.m - 1);
        if (left && right) return a;
    }
    throw Error(ErrorKind::StructureMismatch, "no triangle on the special edge");
}

bool contains_perturbed_center(int m, const std::vector<int>& polygon) {
    const std::size_t q = polygon.size();
    for (std::size_t i = 0; i < q; ++i) {
        int a = polygon[i], b = polygon[(i + 1) % q];
        int arc = (b - a + m) % m;
        if (2 * arc > m) return false;
    }
    for (std::size_t i = 0; i < q; ++i) {
        int a = polygon[i], b = polygon[(i + 1) % q];
        int arc = (b - a + m) % m;
        if (2 * arc == m) {
            // doubled coordinates keep the midpoint of edge (0,1) integral
            int pos = ((1 - 2 * a) % (2 * m) + 2 * m) % (2 * m);
            bool center_in_empty_arc = pos < 2 * arc;
            return !center_in_empty_arc;
        }
    }
    return true;
}

std::vector<int> central_polygon(const KAngulation& t) {
    std::vector<int> found;
    int hits = 0;
    for (auto& f : t.faces()) {
        std::vector<int> s = f;
        std::sort(s.begin(), s.end());
        if (contains_perturbed_center(t.m, s)) {
            found = s;
            ++hits;
        }
    }
    if (hits != 1) throw Error(ErrorKind::StructureMismatch, "central face not unique for " + t.to_string());
    return found;
}

ClassPartition oriented_partition(const FlipGraph& g) {
    if (g.k != 3) throw Error(ErrorKind::InvalidParameter, "oriented partition needs k = 3");
    ClassPartition p;
    p.kind = PartitionKind::Oriented;
    p.graph = &g;
    const int n = g.n, m = g.m;
    for (int a = 1; a <= n; ++a) {
        ClassDescriptor c;
        c.apex = a;
        c.polygon = {0, a, m - 1};
        c.factors = {Factor{3, a - 1, 0, a}, Factor{3, n - a, a, m - 1 - a}};
        p.classes.push_back(std::move(c));
    }
    p.vertex_class.resize(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
        int a = oriented_apex(g.vertices[v]);
        p.vertex_class[v] = static_cast<std::uint32_t>(a - 1);
        p.classes[a - 1].members.push_back(static_cast<std::uint32_t>(v));
    }
    finish_partition(p);
    return p;
}

ClassPartition central_partition(const FlipGraph& g) {
    ClassPartition p;
    p.kind = PartitionKind::Central;
    p.graph = &g;
    std::map<std::vector<int>, std::vector<std::uint32_t>> groups;
    for (std::size_t v = 0; v < g.size(); ++v) groups[central_polygon(g.vertices[v])].push_back(static_cast<std::uint32_t>(v));
    p.vertex_class.resize(g.size());
    for (auto& [poly, mem] : groups) {
        ClassDescriptor c;
        c.polygon = poly;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            int a = poly[i], b = poly[(i + 1) % poly.size()];
            int span = (b - a + g.m) % g.m;
            c.factors.push_back(Factor{g.k, (span - 1) / (g.k - 2), a, span});
        }
        for (auto v : mem) p.vertex_class[v] = static_cast<std::uint32_t>(p.classes.size());
        c.members = mem;
        p.classes.push_back(std::move(c));
    }
    finish_partition(p);
    return p;
}

void verify_cartesian_structure(const ClassPartition& p) {
    const Graph& G = p.graph->graph;
    for (std::uint32_t ci = 0; ci < p.classes.size(); ++ci) {
        const auto& cls = p.classes[ci];
        std::size_t intra_arcs = 0;
        for (auto v : cls.members) {
            for (auto w : G.neighbors(v)) {
                if (p.vertex_class[w] != ci) continue;
                ++intra_arcs;
                const auto& cv = p.coords[v];
                const auto& cw = p.coords[w];
                int diff = -1, ndiff = 0;
                for (std::size_t i = 0; i < cv.size(); ++i)
                    if (cv[i] != cw[i]) {
                        diff = static_cast<int>(i);
                        ++ndiff;
                    }
                if (ndiff != 1) throw Error(ErrorKind::StructureMismatch, "intra-class edge moves in several factors");
                const Graph& F = p.factor_graph(cls.factors[diff]).graph;
                if (F.arc_index(cv[diff], cw[diff]) == F.num_arcs())
                    throw Error(ErrorKind::StructureMismatch, "intra-class edge is not a factor flip");
            }
        }
        // product arc count: sum_i arcs(F_i) * prod_{j != i} |F_j|
        std::size_t expect = 0;
        for (std::size_t i = 0; i < cls.factors.size(); ++i) {
            std::size_t term = p.factor_graph(cls.factors[i]).graph.num_arcs();
            for (std::size_t j = 0; j < cls.factors.size(); ++j)
                if (j != i) term *= p.factor_graph(cls.factors[j]).size();
            expect += term;
        }
        if (expect != intra_arcs) throw Error(ErrorKind::StructureMismatch, "class is missing product edges");
    }
}

std::vector<BoundaryMatching> boundary_matchings(const ClassPartition& p) {
    const Graph& G = p.graph->graph;
    const std::size_t nc = p.classes.size();
    std::vector<BoundaryMatching> out;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> slot;
    for (std::uint32_t a = 0; a < nc; ++a)
        for (std::uint32_t b = a + 1; b < nc; ++b) {
            slot[{a, b}] = out.size();
            out.push_back(BoundaryMatching{a, b, {}, {}, {}});
        }
    for (std::size_t v = 0; v < G.num_vertices(); ++v)
        for (auto w : G.neighbors(v)) {
            auto cv = p.vertex_class[v], cw = p.vertex_class[w];
            if (cv < cw) out[slot[{cv, cw}]].edges.push_back({static_cast<std::uint32_t>(v), w});
        }
    for (auto& bm : out) {
        for (auto [x, y] : bm.edges) {
            bm.boundary_a.push_back(x);
            bm.boundary_b.push_back(y);
        }
        std::sort(bm.boundary_a.begin(), bm.boundary_a.end());
        std::sort(bm.boundary_b.begin(), bm.boundary_b.end());
        if (std::adjacent_find(bm.boundary_a.begin(), bm.boundary_a.end()) != bm.boundary_a.end() ||
            std::adjacent_find(bm.boundary_b.begin(), bm.boundary_b.end()) != bm.boundary_b.end())
            throw Error(ErrorKind::StructureMismatch,
                        "edges between classes " + std::to_string(bm.class_a) + " and " + std::to_string(bm.class_b) +
                            " are not a matching");
        if (p.kind == PartitionKind::Oriented && bm.edges.empty())
            throw Error(ErrorKind::StructureMismatch, "empty matching between oriented classes");
    }
    return out;
}

void verify_edge_classification(const ClassPartition& p, const std::vector<BoundaryMatching>& ms) {
    const Graph& G = p.graph->graph;
    std::size_t intra = 0;
    for (std::size_t v = 0; v < G.num_vertices(); ++v)
        for (auto w : G.neighbors(v))
            if (v < w && p.vertex_class[v] == p.vertex_class[w]) ++intra;
    std::size_t inter = 0;
    for (const auto& bm : ms) inter += bm.edges.size();
    if (intra + inter != G.num_edges()) throw Error(ErrorKind::StructureMismatch, "edges not partitioned");
}

BigCount oriented_class_size(int n, int apex) { return catalan(apex - 1) * catalan(n - apex); }

BigCount oriented_matching_size(int n, int a, int b) {
    if (a > b) std::swap(a, b);
    return catalan(a - 1) * catalan(b - a - 1) * catalan(n - b);
}

namespace {
MatchingInequalityReport inequality_from(int n, const std::function<BigCount(int, int)>& edges,
                                         const std::function<BigCount(int)>& size) {
    MatchingInequalityReport r;
    r.max_slack = -1;
    const BigCount cn = catalan(n);
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) {
            BigCount e = edges(a, b);
            BigCount lhs = e * cn, rhs = size(a) * size(b);
            ++r.pairs_checked;
            if (lhs < rhs)
                throw Error(ErrorKind::LemmaViolation, "matching inequality fails for apexes " + std::to_string(a) +
                                                           "," + std::to_string(b));
            Rational slack(rhs, lhs);
            slack.canonicalize();
            if (slack > r.max_slack) {
                r.max_slack = slack;
                r.worst_a = a;
                r.worst_b = b;
            }
        }
    if (r.pairs_checked == 0) r.max_slack = 0;
    return r;
}
}  // namespace

MatchingInequalityReport verify_matching_inequality(const ClassPartition& p) {
    if (p.kind != PartitionKind::Oriented) throw Error(ErrorKind::InvalidParameter, "needs the oriented partition");
    auto ms = boundary_matchings(p);
    const int n = p.graph->n;
    std::map<std::pair<int, int>, std::size_t> count;
    for (const auto& bm : ms) count[{static_cast<int>(bm.class_a) + 1, static_cast<int>(bm.class_b) + 1}] = bm.edges.size();
    return inequality_from(
        n, [&](int a, int b) { return BigCount(static_cast<unsigned long>(count.at({a, b}))); },
        [&](int a) { return BigCount(static_cast<unsigned long>(p.classes[a - 1].size())); });
}

MatchingInequalityReport verify_matching_inequality_closed_form(int n) {
    return inequality_from(
        n, [&](int a, int b) { return oriented_matching_size(n, a, b); }, [&](int a) { return oriented_class_size(n, a); });
}

BoundaryProjection boundary_projection(const ClassPartition& p, std::uint32_t a, std::uint32_t b) {
    if (p.kind != PartitionKind::Oriented) throw Error(ErrorKind::InvalidParameter, "needs the oriented partition");
    if (a == b || a >= p.classes.size() || b >= p.classes.size()) throw Error(ErrorKind::InvalidParameter, "bad class pair");
    const auto& ca = p.classes[a];
    const int u = ca.apex, u2 = p.classes[b].apex;
    BoundaryProjection r;
    if (u2 > u) {
        r.factor_index = 1;
        r.sub_apex = u2 - u;
    } else {
        r.factor_index = 0;
        r.sub_apex = u2;
    }
    r.factor = ca.factors[r.factor_index];
    const FlipGraph& fg = p.factor_graph(r.factor);
    const FlipGraph& other = p.factor_graph(ca.factors[1 - r.factor_index]);

    std::vector<std::uint32_t> sub;
    for (std::size_t s = 0; s < fg.size(); ++s)
        if (oriented_apex(fg.vertices[s]) == r.sub_apex) sub.push_back(static_cast<std::uint32_t>(s));
    r.sub_class_size = sub.size();

    // lift: (other coordinate, sub-class member) -> class member
    std::vector<std::uint32_t> lifted;
    for (std::uint32_t o = 0; o < other.size(); ++o)
        for (auto s : sub) {
            std::vector<std::uint32_t> c(2);
            c[r.factor_index] = s;
            c[1 - r.factor_index] = o;
            lifted.push_back(ca.members[p.member_position(a, c)]);
        }
    std::sort(lifted.begin(), lifted.end());

    std::vector<std::uint32_t> boundary;
    const Graph& G = p.graph->graph;
    for (auto v : ca.members)
        for (auto w : G.neighbors(v))
            if (p.vertex_class[w] == b) {
                boundary.push_back(v);
                break;
            }
    std::sort(boundary.begin(), boundary.end());
    if (boundary != lifted || std::adjacent_find(lifted.begin(), lifted.end()) != lifted.end())
        throw Error(ErrorKind::StructureMismatch, "boundary is not the lifted sub-class");
    r.verified = true;
    return r;
}

nlohmann::json to_json(const ClassPartition& p, const std::vector<BoundaryMatching>& ms, bool full_edges) {
    nlohmann::json j;
    j["kind"] = p.kind == PartitionKind::Oriented ? "oriented" : "central";
    j["k"] = p.graph->k;
    j["n"] = p.graph->n;
    auto& cs = j["classes"] = nlohmann::json::array();
    for (const auto& c : p.classes) {
        nlohmann::json e;
        e["polygon"] = c.polygon;
        e["size"] = c.size();
        auto fs = nlohmann::json::array();
        for (const auto& f : c.factors) fs.push_back({{"k", f.k}, {"n", f.n}, {"start", f.start}, {"span", f.span}});
        e["factors"] = fs;
        cs.push_back(std::move(e));
    }
    auto& mj = j["matchings"] = nlohmann::json::array();
    for (const auto& bm : ms) {
        nlohmann::json e{{"a", bm.class_a}, {"b", bm.class_b}, {"size", bm.edges.size()}};
        if (full_edges) {
            auto es = nlohmann::json::array();
            for (auto [x, y] : bm.edges) es.push_back({x, y});
            e["edges"] = es;
        }
        mj.push_back(std::move(e));
    }
    return j;
}

}  // namespace flipwalk

namespace flipwalk {

namespace {
void gap_choices(int k, int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == parts) {
        if (total == 0) out.push_back(cur);
        return;
    }
    for (int g = 1; g <= total; g += k - 2) {
        cur.push_back(g);
        gap_choices(k, total - g, parts, cur, out);
        cur.pop_back();
    }
}

BigCount fuss_of_span(int k, int span) { return fuss_catalan(k, static_cast<unsigned long>((span - 1) / (k - 2))); }
}  // namespace

CentralClassLevel central_class_structure(int k, int n) {
    CentralClassLevel r;
    r.k = k;
    r.n = n;
    r.m = polygon_size(k, n);
    const int m = r.m;
    // k-gons with arcs = 1 mod (k-2), listed by smallest vertex then gaps
    std::vector<std::vector<int>> gaps;
    std::vector<int> cur;
    gap_choices(k, m, k, cur, gaps);
    std::vector<std::vector<int>> polys;
    for (int start = 0; start < m; ++start)
        for (const auto& gs : gaps) {
            std::vector<int> poly{start};
            for (int i = 0; i + 1 < k; ++i) poly.push_back(poly.back() + gs[i]);
            if (poly.back() >= m) continue;
            if (contains_perturbed_center(m, poly)) polys.push_back(poly);
        }
    std::sort(polys.begin(), polys.end());
    polys.erase(std::unique(polys.begin(), polys.end()), polys.end());
    r.polygons = polys;
    std::map<std::vector<int>, std::uint32_t> index;
    for (std::uint32_t i = 0; i < polys.size(); ++i) index[polys[i]] = i;
    for (const auto& poly : polys) {
        BigCount s = 1;
        for (int i = 0; i < k; ++i) s *= fuss_of_span(k, (poly[(i + 1) % k] - poly[i] + m) % m);
        r.sizes.push_back(s);
    }
    for (std::uint32_t t = 0; t < polys.size(); ++t) {
        const auto& poly = polys[t];
        for (int i = 0; i < k; ++i) {
            const int a = poly[i], span = (poly[(i + 1) % k] - a + m) % m;
            if (span == 1) continue;
            std::vector<std::vector<int>> ugaps;
            gap_choices(k, span, k - 1, cur, ugaps);
            for (const auto& ug : ugaps) {
                // Q counterclockwise starting at a: the interior vertices of U, then T's other vertices
                std::vector<int> q{a};
                int x = a;
                for (int j = 0; j + 1 < k - 1; ++j) {
                    x = (x + ug[j]) % m;
                    q.push_back(x);
                }
                for (int j = 1; j < k; ++j) q.push_back(poly[(i + j) % k]);
                BigCount outer = 1;
                for (std::size_t j = 0; j < q.size(); ++j) outer *= fuss_of_span(k, (q[(j + 1) % q.size()] - q[j] + m) % m);
                // current diagonal joins q[0] and q[k-1]; the others are q[p], q[p+k-1]
                for (int p = 1; p <= k - 2; ++p) {
                    std::vector<int> f1, f2;
                    for (int j = p; j <= p + k - 1; ++j) f1.push_back(q[j % q.size()]);
                    for (int j = p + k - 1; j <= p + 2 * k - 2; ++j) f2.push_back(q[j % q.size()]);
                    std::sort(f1.begin(), f1.end());
                    std::sort(f2.begin(), f2.end());
                    bool c1 = contains_perturbed_center(m, f1), c2 = contains_perturbed_center(m, f2);
                    if (c1 == c2) throw Error(ErrorKind::StructureMismatch, "flip does not land in one central class");
                    auto it = index.find(c1 ? f1 : f2);
                    if (it == index.end()) throw Error(ErrorKind::StructureMismatch, "unknown central polygon");
                    r.edges[{t, it->second}] += outer;
                }
            }
        }
    }
    return r;
}

}  // namespace flipwalk
