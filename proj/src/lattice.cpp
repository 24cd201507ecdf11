#include "flipwalk/lattice.hpp"

#include "flipwalk/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace flipwalk {

namespace {

struct Pt {
    long x, y;
};

Pt point(int n, int p) { return {p % n, p / n}; }

long cross(Pt o, Pt a, Pt b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

Segment seg(int a, int b) { return a < b ? Segment{a, b} : Segment{b, a}; }

bool on_hull(int n, const Segment& s) {
    Pt a = point(n, s.first), b = point(n, s.second);
    return (a.x == b.x && (a.x == 0 || a.x == n - 1)) || (a.y == b.y && (a.y == 0 || a.y == n - 1));
}

void check_n(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "grid side must be at least 1");
}

}  // namespace

std::size_t lattice_edge_count(int n) {
    check_n(n);
    if (n == 1) return 0;
    const std::size_t p = static_cast<std::size_t>(n) * n, h = 4 * static_cast<std::size_t>(n - 1);
    return 3 * p - 3 - h;
}

bool primitive(int n, int a, int b) {
    Pt p = point(n, a), q = point(n, b);
    return a != b && std::gcd(std::abs(p.x - q.x), std::abs(p.y - q.y)) == 1;
}

bool segments_cross(int n, const Segment& s, const Segment& t) {
    if (s.first == t.first || s.first == t.second || s.second == t.first || s.second == t.second) return false;
    Pt a = point(n, s.first), b = point(n, s.second), c = point(n, t.first), d = point(n, t.second);
    long d1 = cross(a, b, c), d2 = cross(a, b, d), d3 = cross(c, d, a), d4 = cross(c, d, b);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

std::size_t LatticeTriangulation::triangle_count() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) * n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::size_t c = 0;
    for (auto [a, b] : edges)
        for (int r : adj[a])
            if (r > b && has_edge(b, r) && std::abs(cross(point(n, a), point(n, b), point(n, r))) == 1) ++c;
    return c;
}

bool LatticeTriangulation::has_edge(int a, int b) const { return std::binary_search(edges.begin(), edges.end(), seg(a, b)); }

std::string LatticeTriangulation::key() const {
    std::string k;
    k.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        k.push_back(static_cast<char>(a));
        k.push_back(static_cast<char>(b));
    }
    return k;
}

std::string LatticeTriangulation::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (auto [a, b] : edges) {
        Pt p = point(n, a), q = point(n, b);
        os << (first ? "" : " ") << '(' << p.x << ',' << p.y << ")-(" << q.x << ',' << q.y << ')';
        first = false;
    }
    return os.str();
}

LatticeTriangulation canonical_lattice(int n) {
    check_n(n);
    LatticeTriangulation t;
    t.n = n;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            int p = x + n * y;
            if (x + 1 < n) t.edges.push_back({p, p + 1});
            if (y + 1 < n) t.edges.push_back({p, p + n});
            if (x + 1 < n && y + 1 < n) t.edges.push_back(seg(p + 1, p + n));
        }
    std::sort(t.edges.begin(), t.edges.end());
    return t;
}

std::vector<LatticeFlip> flips_lattice(const LatticeTriangulation& t, const std::vector<Segment>& fixed) {
    const int n = t.n;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n) * n);
    for (auto [a, b] : t.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<LatticeFlip> out;
    for (const auto& e : t.edges) {
        if (on_hull(n, e) || std::binary_search(fixed.begin(), fixed.end(), e)) continue;
        const Pt a = point(n, e.first), b = point(n, e.second);
        int left = -1, right = -1;
        for (int r : adj[e.first]) {
            if (!t.has_edge(e.second, r)) continue;
            long c = cross(a, b, point(n, r));
            if (c == 1) left = r;
            if (c == -1) right = r;
        }
        if (left < 0 || right < 0) throw Error(ErrorKind::InvalidInput, "interior edge without two faces");
        Segment ins = seg(left, right);
        if (!segments_cross(n, e, ins)) continue;  // reflex quadrilateral
        LatticeFlip f;
        f.removed = e;
        f.inserted = ins;
        f.result.n = n;
        f.result.edges = t.edges;
        f.result.edges.erase(std::lower_bound(f.result.edges.begin(), f.result.edges.end(), e));
        f.result.edges.insert(std::lower_bound(f.result.edges.begin(), f.result.edges.end(), ins), ins);
        out.push_back(std::move(f));
    }
    return out;
}

std::size_t LatticeFlipGraph::index_of(const LatticeTriangulation& t) const {
    auto it = index.find(t.key());
    return it == index.end() ? vertices.size() : it->second;
}

LatticeFlipGraph enumerate_lattice(int n, const std::vector<Segment>& fixed_in) {
    check_n(n);
    if (n > 4) throw Error(ErrorKind::TooLarge, "lattice enumeration is limited to n <= 4");
    std::vector<Segment> fixed = fixed_in;
    for (auto& s : fixed) s = seg(s.first, s.second);
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
    LatticeTriangulation start = canonical_lattice(n);
    for (const auto& s : fixed)
        if (!start.has_edge(s.first, s.second)) throw Error(ErrorKind::InvalidInput, "fixed edge not in the canonical triangulation");

    std::unordered_map<std::string, std::uint32_t> seen;
    std::vector<LatticeTriangulation> order{start};
    seen.emplace(start.key(), 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (auto& f : flips_lattice(order[i], fixed)) {
            auto [it, fresh] = seen.emplace(f.result.key(), static_cast<std::uint32_t>(order.size()));
            if (fresh) order.push_back(std::move(f.result));
            if (i < it->second) edges.push_back({static_cast<std::uint32_t>(i), it->second});
        }
    }
    // canonical vertex order
    std::vector<std::uint32_t> perm(order.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::sort(perm.begin(), perm.end(), [&](auto x, auto y) { return order[x] < order[y]; });
    std::vector<std::uint32_t> pos(order.size());
    LatticeFlipGraph g;
    g.n = n;
    g.fixed = fixed;
    for (std::uint32_t i = 0; i < perm.size(); ++i) {
        pos[perm[i]] = i;
        g.vertices.push_back(order[perm[i]]);
        g.index.emplace(g.vertices.back().key(), i);
    }
    for (auto& [a, b] : edges) {
        a = pos[a];
        b = pos[b];
    }
    g.graph = Graph::from_edges(g.vertices.size(), edges);
    return g;
}

std::vector<LatticeTriangulation> enumerate_lattice_direct(int n) {
    check_n(n);
    if (n > 4) throw Error(ErrorKind::TooLarge, "lattice enumeration is limited to n <= 4");
    const int np = n * n;
    std::vector<Segment> segs;
    for (int a = 0; a < np; ++a)
        for (int b = a + 1; b < np; ++b)
            if (primitive(n, a, b)) segs.push_back({a, b});
    const std::size_t ns = segs.size(), target = lattice_edge_count(n);
    std::vector<std::vector<std::size_t>> crossing(ns);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j)
            if (segments_cross(n, segs[i], segs[j])) crossing[i].push_back(j);
    std::vector<int> blocked(ns, 0);
    std::vector<Segment> chosen;
    std::vector<LatticeTriangulation> out;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (chosen.size() == target) {
            LatticeTriangulation t;
            t.n = n;
            t.edges = chosen;
            out.push_back(std::move(t));
            return;
        }
        if (i == ns || chosen.size() + (ns - i) < target) return;
        if (!blocked[i]) {
            chosen.push_back(segs[i]);
            for (auto j : crossing[i]) ++blocked[j];
            self(self, i + 1);
            for (auto j : crossing[i]) --blocked[j];
            chosen.pop_back();
        }
        // leaving an unblocked segment out is only consistent if something later blocks it
        bool can_skip = blocked[i] > 0;
        if (!can_skip)
            for (auto j : crossing[i])
                if (j > i) {
                    can_skip = true;
                    break;
                }
        if (can_skip) self(self, i + 1);
    };
    // a non-crossing set of primitive segments of full size is a triangulation
    rec(rec, 0);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Segment> product_constraint(int n, int block) {
    check_n(n);
    if (block < 1 || n % block != 0) throw Error(ErrorKind::InvalidParameter, "block size must divide the grid side");
    auto between = [&](int c) { return (c + 1) % block == 0; };  // cell [c, c+1] straddles two blocks
    std::vector<Segment> fixed;
    for (int y = 0; y + 1 < n; ++y)
        for (int x = 0; x + 1 < n; ++x) {
            if (!between(x) && !between(y)) continue;
            int p = x + n * y;
            fixed.push_back({p, p + 1});
            fixed.push_back({p, p + n});
            fixed.push_back({p + 1, p + 1 + n});
            fixed.push_back({p + n, p + n + 1});
            fixed.push_back(seg(p + 1, p + n));
        }
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());
    return fixed;
}

ProductSubgraph product_subgraph(int n, int block) {
    ProductSubgraph r;
    r.n = n;
    r.block = block;
    auto fixed = product_constraint(n, block);
    r.h = enumerate_lattice(n, fixed);
    r.block_graph = enumerate_lattice(block);
    const int nb = n / block;
    const Graph& B = r.block_graph.graph;
    // restriction of each member to each block, translated to the block's own grid
    r.coords.resize(r.h.size());
    for (std::size_t v = 0; v < r.h.size(); ++v) {
        const auto& t = r.h.vertices[v];
        for (int by = 0; by < nb; ++by)
            for (int bx = 0; bx < nb; ++bx) {
                LatticeTriangulation s;
                s.n = block;
                for (auto [a, b] : t.edges) {
                    Pt p = point(n, a), q = point(n, b);
                    auto inside = [&](Pt z) {
                        return z.x >= bx * block && z.x < (bx + 1) * block && z.y >= by * block && z.y < (by + 1) * block;
                    };
                    if (inside(p) && inside(q)) {
                        int la = static_cast<int>((p.x - bx * block) + block * (p.y - by * block));
                        int lb = static_cast<int>((q.x - bx * block) + block * (q.y - by * block));
                        s.edges.push_back(seg(la, lb));
                    }
                }
                std::sort(s.edges.begin(), s.edges.end());
                std::size_t idx = r.block_graph.index_of(s);
                if (idx == r.block_graph.size()) throw Error(ErrorKind::StructureMismatch, "block restriction is not a triangulation");
                r.coords[v].push_back(static_cast<std::uint32_t>(idx));
            }
    }
    // bijection with the product and edges exactly the product edges
    std::size_t expected = 1;
    for (int i = 0; i < nb * nb; ++i) expected *= r.block_graph.size();
    std::set<std::vector<std::uint32_t>> distinct(r.coords.begin(), r.coords.end());
    bool ok = distinct.size() == r.h.size() && r.h.size() == expected;
    std::size_t product_arcs = 0;
    if (ok) {
        for (std::size_t v = 0; v < r.h.size(); ++v)
            for (auto w : r.h.graph.neighbors(v)) {
                int diff = 0;
                for (std::size_t i = 0; i < r.coords[v].size(); ++i)
                    if (r.coords[v][i] != r.coords[w][i]) {
                        ++diff;
                        if (B.arc_index(r.coords[v][i], r.coords[w][i]) == B.num_arcs()) ok = false;
                    }
                if (diff != 1) ok = false;
            }
        // arcs of the product: each vertex has sum of block degrees
        for (std::size_t v = 0; v < r.h.size(); ++v)
            for (auto c : r.coords[v]) product_arcs += B.degree(c);
        ok = ok && product_arcs == r.h.graph.num_arcs();
    }
    r.product_verified = ok;
    return r;
}

std::optional<std::vector<std::uint32_t>> hypercube_labelling(const Graph& g) {
    const std::size_t nv = g.num_vertices();
    if (nv == 0 || (nv & (nv - 1)) != 0) return std::nullopt;
    const int d = __builtin_ctzll(nv);
    if (d > 31) return std::nullopt;
    for (std::size_t v = 0; v < nv; ++v)
        if (g.degree(v) != static_cast<std::size_t>(d)) return std::nullopt;
    auto dist = g.bfs_distances(0);
    std::vector<std::uint32_t> label(nv, 0);
    std::vector<std::uint32_t> order(nv);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });
    int bit = 0;
    for (auto v : order) {
        if (dist[v] < 0) return std::nullopt;
        if (dist[v] == 1) label[v] = 1u << bit++;
        else if (dist[v] > 1)
            for (auto w : g.neighbors(v))
                if (dist[w] == dist[v] - 1) label[v] |= label[w];
    }
    std::vector<char> used(nv, 0);
    for (auto l : label) {
        if (l >= nv || used[l]) return std::nullopt;
        used[l] = 1;
    }
    for (std::size_t v = 0; v < nv; ++v)
        for (auto w : g.neighbors(v))
            if (__builtin_popcount(label[v] ^ label[w]) != 1) return std::nullopt;
    return label;
}

nlohmann::json to_json(const LatticeFlipGraph& g) {
    nlohmann::json j;
    j["n"] = g.n;
    auto& vs = j["vertices"] = nlohmann::json::array();
    for (const auto& t : g.vertices) {
        auto row = nlohmann::json::array();
        for (auto [a, b] : t.edges) {
            Pt p = point(g.n, a), q = point(g.n, b);
            row.push_back({p.x, p.y, q.x, q.y});
        }
        vs.push_back(std::move(row));
    }
    auto& es = j["edges"] = nlohmann::json::array();
    for (std::size_t v = 0; v < g.size(); ++v)
        for (auto w : g.graph.neighbors(v))
            if (v < w) es.push_back({v, w});
    auto& fx = j["fixed"] = nlohmann::json::array();
    for (auto [a, b] : g.fixed) {
        Pt p = point(g.n, a), q = point(g.n, b);
        fx.push_back({p.x, p.y, q.x, q.y});
    }
    return j;
}

std::string to_dot(const LatticeFlipGraph& g) {
    std::ostringstream os;
    os << "graph F_" << g.n << " {\n";
    for (std::size_t v = 0; v < g.size(); ++v) os << "  " << v << " [label=\"" << g.vertices[v].to_string() << "\"];\n";
    for (std::size_t v = 0; v < g.size(); ++v)
        for (auto w : g.graph.neighbors(v))
            if (v < w) os << "  " << v << " -- " << w << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace flipwalk
