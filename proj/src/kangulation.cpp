#include "flipwalk/kangulation.hpp"
#include "flipwalk/combinatorics.hpp"
#include "flipwalk/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace flipwalk {

namespace {

using Mask = std::uint64_t;

std::vector<Mask> adjacency_masks(const KAngulation& t) {
    std::vector<Mask> adj(t.m, 0);
    for (int v = 0; v < t.m; ++v) {
        int w = (v + 1) % t.m;
        adj[v] |= Mask{1} << w;
        adj[w] |= Mask{1} << v;
    }
    for (auto d : t.diagonals) {
        adj[d.a] |= Mask{1} << d.b;
        adj[d.b] |= Mask{1} << d.a;
    }
    return adj;
}

// face walk counterclockwise from `from` to `to`, always taking the farthest
// neighbor that does not pass `to`; the first step skips the chord from-to itself
std::vector<int> walk_face(const std::vector<Mask>& adj, int m, int from, int to) {
    std::vector<int> face{from};
    const int target = (to - from + m) % m;
    int cur = from;
    while (cur != to) {
        int cr = (cur - from + m) % m;
        int best = -1, bestr = cr;
        for (Mask bits = adj[cur]; bits; bits &= bits - 1) {
            int x = __builtin_ctzll(bits);
            int r = (x - from + m) % m;
            const int lim = cur == from ? target - 1 : target;
            if (r > bestr && r <= lim) {
                bestr = r;
                best = x;
            }
        }
        if (best < 0) return {};
        face.push_back(best);
        cur = best;
    }
    return face;
}

Diagonal norm(int a, int b) { return a < b ? Diagonal{a, b} : Diagonal{b, a}; }

using Lists = std::vector<std::vector<Diagonal>>;

// all k-angulations of the polygon 0..s with special edge (s, 0)
const Lists& enumerate_relative(int k, int s, std::map<int, Lists>& memo) {
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    Lists out;
    if (s == 1) {
        out.push_back({});
    } else {
        std::vector<int> gaps;
        // recursive choice of the k-1 gaps of the k-gon on the special edge
        auto rec = [&](auto&& self, int used) -> void {
            if (static_cast<int>(gaps.size()) == k - 1) {
                if (used != s) return;
                Lists acc{{}};
                int v = 0;
                for (int g : gaps) {
                    if (g > 1) {
                        const Lists& sub = enumerate_relative(k, g, memo);
                        Lists nxt;
                        nxt.reserve(acc.size() * sub.size());
                        for (const auto& a : acc)
                            for (const auto& b : sub) {
                                auto c = a;
                                c.push_back({v, v + g});
                                for (auto d : b) c.push_back({d.a + v, d.b + v});
                                nxt.push_back(std::move(c));
                            }
                        acc = std::move(nxt);
                    }
                    v += g;
                }
                for (auto& a : acc) out.push_back(std::move(a));
                return;
            }
            for (int g = 1; used + g <= s; g += k - 2) {
                gaps.push_back(g);
                self(self, used + g);
                gaps.pop_back();
            }
        };
        rec(rec, 0);
    }
    return memo.emplace(s, std::move(out)).first->second;
}

}  // namespace

bool crosses(Diagonal d, Diagonal e) {
    auto [a, b] = d;
    auto [c, x] = e;
    if (a == c || a == x || b == c || b == x) return false;
    return (a < c && c < b && b < x) || (c < a && a < x && x < b);
}

int polygon_size(int k, int n) {
    if (k < 3 || n < 0) throw Error(ErrorKind::InvalidParameter, "need k >= 3, n >= 0");
    return (k - 2) * n + 2;
}

KAngulation make_kangulation(int k, int m, std::vector<Diagonal> diagonals) {
    for (auto& d : diagonals) d = norm(d.a, d.b);
    std::sort(diagonals.begin(), diagonals.end());
    return KAngulation{k, m, std::move(diagonals)};
}

bool KAngulation::has_diagonal(int a, int b) const {
    return std::binary_search(diagonals.begin(), diagonals.end(), norm(a, b));
}

std::vector<std::vector<int>> KAngulation::faces() const {
    std::vector<std::vector<int>> out;
    if (m < 3) return out;
    auto adj = adjacency_masks(*this);
    std::vector<std::pair<int, int>> stack{{0, m - 1}};
    while (!stack.empty()) {
        auto [lo, hi] = stack.back();
        stack.pop_back();
        auto f = walk_face(adj, m, lo, hi);
        if (f.empty()) return {};
        for (std::size_t i = 0; i + 1 < f.size(); ++i)
            if (f[i + 1] - f[i] > 1) stack.push_back({f[i], f[i + 1]});
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool KAngulation::valid() const {
    if (k < 3 || m < 2 || m > 64 || (m - 2) % (k - 2) != 0) return false;
    const int nn = n();
    if (static_cast<int>(diagonals.size()) != std::max(nn - 1, 0)) return false;
    if (!std::is_sorted(diagonals.begin(), diagonals.end())) return false;
    if (std::adjacent_find(diagonals.begin(), diagonals.end()) != diagonals.end()) return false;
    for (auto d : diagonals) {
        if (d.a < 0 || d.b >= m || d.b - d.a < 2 || (d.a == 0 && d.b == m - 1)) return false;
    }
    for (std::size_t i = 0; i < diagonals.size(); ++i)
        for (std::size_t j = i + 1; j < diagonals.size(); ++j)
            if (crosses(diagonals[i], diagonals[j])) return false;
    if (nn == 0) return true;
    auto fs = faces();
    if (static_cast<int>(fs.size()) != nn) return false;
    return std::all_of(fs.begin(), fs.end(), [&](const auto& f) { return static_cast<int>(f.size()) == k; });
}

std::string KAngulation::key() const {
    std::string s;
    s.reserve(diagonals.size() * 2);
    for (auto d : diagonals) {
        s.push_back(static_cast<char>(d.a));
        s.push_back(static_cast<char>(d.b));
    }
    return s;
}

std::string KAngulation::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < diagonals.size(); ++i)
        os << (i ? " " : "") << diagonals[i].a << '-' << diagonals[i].b;
    os << ']';
    return os.str();
}

std::vector<KAngulation> enumerate(int k, int n, std::uint64_t cap) {
    if (k < 3 || n < 0) throw Error(ErrorKind::InvalidParameter, "enumerate needs k >= 3, n >= 0");
    const int m = polygon_size(k, n);
    if (m > 64) throw Error(ErrorKind::InvalidParameter, "polygon larger than 64 vertices");
    BigCount count = fuss_catalan(k, n);
    if (count > BigCount(static_cast<unsigned long>(cap)))
        throw Error(ErrorKind::EnumerationTooLarge,
                    "fuss_catalan(" + std::to_string(k) + "," + std::to_string(n) + ") = " + count.get_str() +
                        " exceeds cap " + std::to_string(cap));
    if (n == 0) return {KAngulation{k, m, {}}};
    std::map<int, Lists> memo;
    Lists lists = enumerate_relative(k, m - 1, memo);
    std::vector<KAngulation> out;
    out.reserve(lists.size());
    for (auto& l : lists) out.push_back(make_kangulation(k, m, std::move(l)));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Flip> flips(const KAngulation& t) {
    std::vector<Flip> out;
    auto adj = adjacency_masks(t);
    const int k = t.k;
    for (auto d : t.diagonals) {
        auto side_a = walk_face(adj, t.m, d.a, d.b);
        auto side_b = walk_face(adj, t.m, d.b, d.a);
        if (static_cast<int>(side_a.size()) != k || static_cast<int>(side_b.size()) != k)
            throw Error(ErrorKind::InvalidInput, "not a k-angulation: " + t.to_string());
        // the 2k-2 gon around d, counterclockwise starting at d.a
        std::vector<int> cyc(side_a.begin(), side_a.end());
        cyc.insert(cyc.end(), side_b.begin() + 1, side_b.end() - 1);
        for (int p = 1; p <= k - 2; ++p) {
            Diagonal ins = norm(cyc[p], cyc[p + k - 1]);
            std::vector<Diagonal> ds;
            ds.reserve(t.diagonals.size());
            for (auto e : t.diagonals)
                if (e != d) ds.push_back(e);
            ds.insert(std::lower_bound(ds.begin(), ds.end(), ins), ins);
            out.push_back({KAngulation{t.k, t.m, std::move(ds)}, d, ins});
        }
    }
    return out;
}

KAngulation dihedral_image(const KAngulation& t, int r, bool reflect) {
    std::vector<Diagonal> ds;
    ds.reserve(t.diagonals.size());
    for (auto d : t.diagonals) {
        int a = reflect ? t.m - 1 - d.a : d.a;
        int b = reflect ? t.m - 1 - d.b : d.b;
        ds.push_back(norm((a + r) % t.m, (b + r) % t.m));
    }
    return make_kangulation(t.k, t.m, std::move(ds));
}

std::size_t FlipGraph::index_of(const KAngulation& t) const {
    auto it = index_.find(t.key());
    return it == index_.end() ? vertices.size() : it->second;
}

void FlipGraph::rebuild_index() {
    index_.clear();
    index_.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) index_.emplace(vertices[i].key(), static_cast<std::uint32_t>(i));
}

FlipGraph build_flip_graph(int k, int n, std::uint64_t cap) {
    FlipGraph g;
    g.k = k;
    g.n = n;
    g.m = polygon_size(k, n);
    g.vertices = enumerate(k, n, cap);
    g.rebuild_index();
    const std::size_t nv = g.vertices.size();
    std::vector<std::vector<std::pair<std::uint32_t, ArcLabel>>> rows(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        for (auto& f : flips(g.vertices[v])) {
            std::size_t w = g.index_of(f.result);
            if (w == nv) throw Error(ErrorKind::StructureMismatch, "flip left the enumeration");
            rows[v].push_back({static_cast<std::uint32_t>(w), {f.removed, f.inserted}});
        }
        std::sort(rows[v].begin(), rows[v].end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    }
    std::vector<std::vector<std::uint32_t>> adj(nv);
    for (std::size_t v = 0; v < nv; ++v)
        for (auto& [w, l] : rows[v]) adj[v].push_back(w);
    g.graph = Graph::from_adjacency(adj);
    g.arc_labels.reserve(g.graph.num_arcs());
    for (std::size_t v = 0; v < nv; ++v)
        for (auto& [w, l] : rows[v]) g.arc_labels.push_back(l);
    return g;
}

std::vector<std::uint32_t> dihedral_orbit_representatives(const FlipGraph& g) {
    const std::size_t nv = g.size();
    std::vector<std::uint32_t> reps;
    for (std::size_t v = 0; v < nv; ++v) {
        std::uint32_t best = static_cast<std::uint32_t>(v);
        for (int r = 0; r < g.m; ++r)
            for (bool refl : {false, true}) {
                std::size_t w = g.index_of(dihedral_image(g.vertices[v], r, refl));
                if (w == nv) throw Error(ErrorKind::StructureMismatch, "dihedral image missing");
                best = std::min(best, static_cast<std::uint32_t>(w));
            }
        if (best == v) reps.push_back(best);
    }
    return reps;
}

int flip_graph_diameter(const FlipGraph& g) {
    auto ecc = g.graph.eccentricities(dihedral_orbit_representatives(g));
    int d = 0;
    for (int e : ecc) {
        if (e < 0) return -1;
        d = std::max(d, e);
    }
    return d;
}

nlohmann::json to_json(const FlipGraph& g) {
    nlohmann::json j;
    j["k"] = g.k;
    j["n"] = g.n;
    auto& vs = j["vertices"] = nlohmann::json::array();
    for (const auto& t : g.vertices) {
        auto row = nlohmann::json::array();
        for (auto d : t.diagonals) row.push_back({d.a, d.b});
        vs.push_back(std::move(row));
    }
    auto& es = j["edges"] = nlohmann::json::array();
    for (std::size_t v = 0; v < g.size(); ++v)
        for (auto w : g.graph.neighbors(v))
            if (v < w) es.push_back({v, w});
    return j;
}

FlipGraph flip_graph_from_json(const nlohmann::json& j) {
    FlipGraph g;
    g.k = j.at("k").get<int>();
    g.n = j.at("n").get<int>();
    g.m = polygon_size(g.k, g.n);
    for (const auto& row : j.at("vertices")) {
        std::vector<Diagonal> ds;
        for (const auto& d : row) ds.push_back({d.at(0).get<int>(), d.at(1).get<int>()});
        g.vertices.push_back(make_kangulation(g.k, g.m, std::move(ds)));
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()});
    g.graph = Graph::from_edges(g.vertices.size(), edges);
    g.rebuild_index();
    // labels are recomputed from the diagonal symmetric difference
    g.arc_labels.resize(g.graph.num_arcs());
    for (std::size_t a = 0; a < g.graph.num_arcs(); ++a) {
        const auto& s = g.vertices[g.graph.arc_tail(a)].diagonals;
        const auto& t = g.vertices[g.graph.arc_head(a)].diagonals;
        std::vector<Diagonal> rem, ins;
        std::set_difference(s.begin(), s.end(), t.begin(), t.end(), std::back_inserter(rem));
        std::set_difference(t.begin(), t.end(), s.begin(), s.end(), std::back_inserter(ins));
        if (rem.size() != 1 || ins.size() != 1) throw Error(ErrorKind::InvalidInput, "edge is not a flip");
        g.arc_labels[a] = {rem[0], ins[0]};
    }
    return g;
}

std::string to_dot(const FlipGraph& g) {
    std::ostringstream os;
    os << "graph K_" << g.k << "_" << g.n << " {\n";
    for (std::size_t v = 0; v < g.size(); ++v) os << "  " << v << " [label=\"" << g.vertices[v].to_string() << "\"];\n";
    for (std::size_t v = 0; v < g.size(); ++v)
        for (auto w : g.graph.neighbors(v))
            if (v < w) os << "  " << v << " -- " << w << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace flipwalk
