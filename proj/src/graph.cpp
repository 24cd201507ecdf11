#include "flipwalk/graph.hpp"
#include "flipwalk/error.hpp"

#include <algorithm>
#include <queue>

namespace flipwalk {

Graph Graph::from_adjacency(const std::vector<std::vector<std::uint32_t>>& adj) {
    Graph g;
    g.offset_.assign(adj.size() + 1, 0);
    for (std::size_t v = 0; v < adj.size(); ++v) g.offset_[v + 1] = g.offset_[v] + adj[v].size();
    g.nbr_.reserve(g.offset_.back());
    for (const auto& row : adj) {
        std::vector<std::uint32_t> r = row;
        std::sort(r.begin(), r.end());
        if (std::adjacent_find(r.begin(), r.end()) != r.end())
            throw Error(ErrorKind::InvalidInput, "multi-edge in adjacency");
        g.nbr_.insert(g.nbr_.end(), r.begin(), r.end());
    }
    g.finish();
    return g;
}

Graph Graph::from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto [u, v] : edges) {
        if (u == v || u >= n || v >= n) throw Error(ErrorKind::InvalidInput, "bad edge");
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    return from_adjacency(adj);
}

void Graph::finish() {
    const std::size_t n = num_vertices();
    tail_.resize(nbr_.size());
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t a = offset_[v]; a < offset_[v + 1]; ++a) tail_[a] = static_cast<std::uint32_t>(v);
    rev_.resize(nbr_.size());
    for (std::size_t a = 0; a < nbr_.size(); ++a) {
        std::size_t r = arc_index(nbr_[a], tail_[a]);
        if (r == nbr_.size()) throw Error(ErrorKind::InvalidInput, "adjacency is not symmetric");
        rev_[a] = static_cast<std::uint32_t>(r);
    }
}

std::size_t Graph::arc_index(std::size_t u, std::size_t v) const {
    auto b = nbr_.begin() + offset_[u], e = nbr_.begin() + offset_[u + 1];
    auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(v));
    if (it == e || *it != v) return nbr_.size();
    return static_cast<std::size_t>(it - nbr_.begin());
}

std::size_t Graph::max_degree() const {
    std::size_t d = 0;
    for (std::size_t v = 0; v < num_vertices(); ++v) d = std::max(d, degree(v));
    return d;
}

bool Graph::is_regular() const {
    for (std::size_t v = 1; v < num_vertices(); ++v)
        if (degree(v) != degree(0)) return false;
    return true;
}

std::vector<int> Graph::bfs_distances(std::size_t src) const {
    std::vector<int> d(num_vertices(), -1);
    std::vector<std::uint32_t> q;
    q.reserve(num_vertices());
    d[src] = 0;
    q.push_back(static_cast<std::uint32_t>(src));
    for (std::size_t h = 0; h < q.size(); ++h) {
        auto v = q[h];
        for (auto w : neighbors(v))
            if (d[w] < 0) {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
    }
    return d;
}

bool Graph::connected() const {
    if (num_vertices() == 0) return true;
    auto d = bfs_distances(0);
    return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

bool Graph::symmetric() const {
    for (std::size_t a = 0; a < nbr_.size(); ++a)
        if (nbr_[rev_[a]] != tail_[a] || tail_[rev_[a]] != nbr_[a]) return false;
    return true;
}

std::vector<int> Graph::eccentricities(const std::vector<std::uint32_t>& sources) const {
    const std::size_t n = num_vertices();
    std::vector<int> ecc(sources.size(), 0);
    std::vector<std::uint64_t> seen(n), frontier(n), next(n);
    for (std::size_t base = 0; base < sources.size(); base += 64) {
        const std::size_t cnt = std::min<std::size_t>(64, sources.size() - base);
        std::fill(seen.begin(), seen.end(), 0);
        std::fill(frontier.begin(), frontier.end(), 0);
        for (std::size_t i = 0; i < cnt; ++i) {
            seen[sources[base + i]] |= 1ULL << i;
            frontier[sources[base + i]] |= 1ULL << i;
        }
        int level = 0;
        bool any = true;
        while (any) {
            any = false;
            std::uint64_t grew = 0;
            for (std::size_t v = 0; v < n; ++v) {
                std::uint64_t acc = 0;
                for (std::size_t a = offset_[v]; a < offset_[v + 1]; ++a) acc |= frontier[nbr_[a]];
                acc &= ~seen[v];
                next[v] = acc;
                grew |= acc;
            }
            if (grew) {
                any = true;
                ++level;
                for (std::size_t i = 0; i < cnt; ++i)
                    if (grew >> i & 1) ecc[base + i] = level;
                for (std::size_t v = 0; v < n; ++v) seen[v] |= next[v];
                frontier.swap(next);
            }
        }
        std::uint64_t all = 0;
        for (std::size_t v = 0; v < n; ++v) all = v == 0 ? seen[v] : (all & seen[v]);
        for (std::size_t i = 0; i < cnt; ++i)
            if (!(all >> i & 1)) ecc[base + i] = -1;
    }
    return ecc;
}

int Graph::diameter() const {
    std::vector<std::uint32_t> all(num_vertices());
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<std::uint32_t>(v);
    auto e = eccentricities(all);
    int d = 0;
    for (int x : e) {
        if (x < 0) return -1;
        d = std::max(d, x);
    }
    return d;
}

}  // namespace flipwalk
