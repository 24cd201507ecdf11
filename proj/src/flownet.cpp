#include "flipwalk/flownet.hpp"
#include "flipwalk/error.hpp"

#include <algorithm>
#include <deque>

namespace flipwalk {

ArcFlow& ArcFlow::operator+=(const ArcFlow& o) {
    if (o.value_.size() != value_.size()) throw Error(ErrorKind::DimensionMismatch, "flows on different graphs");
    for (std::size_t a = 0; a < value_.size(); ++a)
        if (sgn(o.value_[a]) != 0) value_[a] += o.value_[a];
    return *this;
}

void ArcFlow::add_scaled(const ArcFlow& o, const Rational& c) {
    if (o.value_.size() != value_.size()) throw Error(ErrorKind::DimensionMismatch, "flows on different graphs");
    for (std::size_t a = 0; a < value_.size(); ++a)
        if (sgn(o.value_[a]) != 0) value_[a] += c * o.value_[a];
}

void ArcFlow::scale(const Rational& c) {
    for (auto& x : value_)
        if (sgn(x) != 0) x *= c;
}

ArcFlow ArcFlow::reversed() const {
    ArcFlow r(*graph_);
    for (std::size_t a = 0; a < value_.size(); ++a) r.value_[graph_->reverse_arc(a)] = value_[a];
    return r;
}

std::vector<Rational> ArcFlow::divergence() const {
    std::vector<Rational> d(graph_->num_vertices());
    for (std::size_t a = 0; a < value_.size(); ++a) {
        if (sgn(value_[a]) == 0) continue;
        d[graph_->arc_tail(a)] += value_[a];
        d[graph_->arc_head(a)] -= value_[a];
    }
    return d;
}

bool ArcFlow::nonnegative() const {
    return std::all_of(value_.begin(), value_.end(), [](const Rational& x) { return sgn(x) >= 0; });
}

std::size_t ArcFlow::support() const {
    return static_cast<std::size_t>(
        std::count_if(value_.begin(), value_.end(), [](const Rational& x) { return sgn(x) != 0; }));
}

CongestionReport uniform_congestion(const ArcFlow& f) {
    CongestionReport r;
    r.normalization = Normalization::Uniform;
    r.rho = 0;
    for (std::size_t a = 0; a < f.size(); ++a)
        if (f[a] > r.rho) {
            r.rho = f[a];
            r.argmax_arc = a;
        }
    const std::size_t nv = f.graph().num_vertices();
    if (nv > 0) r.rho /= static_cast<unsigned long>(nv);
    if (f.size() > 0) {
        r.argmax_u = f.graph().arc_tail(r.argmax_arc);
        r.argmax_v = f.graph().arc_head(r.argmax_arc);
    }
    return r;
}

CongestionReport chain_congestion(const ArcFlow& f) {
    CongestionReport r = uniform_congestion(f);
    r.normalization = Normalization::Chain;
    r.rho *= 2;
    return r;
}

nlohmann::json to_json(const CongestionReport& r) {
    nlohmann::json j;
    j["rho_num"] = r.rho.get_num().get_str();
    j["rho_den"] = r.rho.get_den().get_str();
    j["rho"] = r.rho.get_d();
    j["argmax_arc"] = {r.argmax_u, r.argmax_v};
    j["normalization"] = r.normalization == Normalization::Uniform ? "uniform" : "chain";
    auto lv = nlohmann::json::array();
    for (const auto& x : r.levels) lv.push_back(x.get_str());
    j["levels"] = lv;
    return j;
}

Rational expansion_lower_bound(const CongestionReport& r) {
    if (sgn(r.rho) <= 0) throw Error(ErrorKind::InvalidInput, "zero congestion has no expansion bound");
    Rational b = 1 / (2 * r.rho);
    b.canonicalize();
    return b;
}

std::vector<Rational> MsfProblem::net(std::size_t nv) const {
    std::vector<Rational> b(nv);
    for (const auto& [v, s] : surplus) {
        if (v >= nv) throw Error(ErrorKind::InvalidInput, "source out of range");
        b[v] += s;
    }
    for (const auto& [v, d] : deficit) {
        if (v >= nv) throw Error(ErrorKind::InvalidInput, "sink out of range");
        b[v] -= d;
    }
    return b;
}

bool certify_msf(const ArcFlow& f, const MsfProblem& p) {
    if (!f.nonnegative()) return false;
    auto b = p.net(f.graph().num_vertices());
    auto d = f.divergence();
    return d == b;
}

void route_on_tree(const Graph& g, const std::vector<std::uint32_t>& vertices, const std::vector<Rational>& net,
                   ArcFlow& out) {
    if (vertices.empty()) return;
    std::vector<char> inside(g.num_vertices(), 0);
    for (auto v : vertices) inside[v] = 1;
    std::vector<std::int64_t> parent(g.num_vertices(), -1);
    std::vector<std::uint32_t> order{vertices.front()};
    std::vector<char> seen(g.num_vertices(), 0);
    seen[vertices.front()] = 1;
    for (std::size_t h = 0; h < order.size(); ++h)
        for (auto w : g.neighbors(order[h]))
            if (inside[w] && !seen[w]) {
                seen[w] = 1;
                parent[w] = order[h];
                order.push_back(w);
            }
    if (order.size() != vertices.size()) throw Error(ErrorKind::NoFlow, "support is disconnected");
    std::vector<Rational> carry(g.num_vertices());
    for (auto v : vertices) carry[v] = net[v];
    for (std::size_t i = order.size(); i-- > 1;) {
        auto v = order[i];
        auto p = static_cast<std::uint32_t>(parent[v]);
        if (sgn(carry[v]) > 0) out[g.arc_index(v, p)] += carry[v];
        else if (sgn(carry[v]) < 0) out[g.arc_index(p, v)] -= carry[v];
        carry[p] += carry[v];
    }
    if (sgn(carry[order.front()]) != 0) throw Error(ErrorKind::InvalidInput, "tree demand does not sum to zero");
}

namespace {

// Edmonds-Karp on the one-hop network source -> S -> T -> sink
ArcFlow direct_matching(const Graph& g, const std::vector<Rational>& b) {
    const std::size_t nv = g.num_vertices();
    Rational total = 0;
    for (const auto& x : b)
        if (sgn(x) > 0) total += x;
    ArcFlow out(g);
    if (sgn(total) == 0) return out;
    // residual capacities: src->v, v->snk, and graph arcs between S and T
    std::vector<Rational> cap_src(nv), cap_snk(nv), used(g.num_arcs());
    for (std::size_t v = 0; v < nv; ++v) {
        if (sgn(b[v]) > 0) cap_src[v] = b[v];
        if (sgn(b[v]) < 0) cap_snk[v] = -b[v];
    }
    Rational flow = 0;
    while (true) {
        // BFS over (S side) -> T side, allowing backward moves along used arcs
        std::vector<std::int64_t> via(nv, -2);  // -1: reached from source, else arc id
        std::deque<std::uint32_t> q;
        for (std::size_t v = 0; v < nv; ++v)
            if (sgn(cap_src[v]) > 0) {
                via[v] = -1;
                q.push_back(static_cast<std::uint32_t>(v));
            }
        std::int64_t hit = -1;
        while (!q.empty() && hit < 0) {
            auto v = q.front();
            q.pop_front();
            if (sgn(b[v]) > 0) {
                for (std::size_t a = g.arc_begin(v); a < g.arc_begin(v) + g.degree(v); ++a) {
                    auto w = g.arc_head(a);
                    if (sgn(b[w]) < 0 && via[w] == -2) {
                        via[w] = static_cast<std::int64_t>(a);
                        if (sgn(cap_snk[w]) > 0) hit = w;
                        q.push_back(w);
                    }
                }
            } else {
                for (std::size_t a = g.arc_begin(v); a < g.arc_begin(v) + g.degree(v); ++a) {
                    auto w = g.arc_head(a);
                    std::size_t fwd = g.reverse_arc(a);
                    if (sgn(b[w]) > 0 && via[w] == -2 && sgn(used[fwd]) > 0) {
                        via[w] = static_cast<std::int64_t>(a);
                        q.push_back(w);
                    }
                }
            }
        }
        if (hit < 0) break;
        // bottleneck
        Rational bott = cap_snk[hit];
        std::uint32_t v = static_cast<std::uint32_t>(hit);
        while (via[v] != -1) {
            std::size_t a = static_cast<std::size_t>(via[v]);
            std::uint32_t u = g.arc_tail(a);
            if (sgn(b[u]) < 0) bott = std::min(bott, used[g.reverse_arc(a)]);
            v = u;
        }
        bott = std::min(bott, cap_src[v]);
        cap_src[v] -= bott;
        v = static_cast<std::uint32_t>(hit);
        cap_snk[v] -= bott;
        while (via[v] != -1) {
            std::size_t a = static_cast<std::size_t>(via[v]);
            std::uint32_t u = g.arc_tail(a);
            if (sgn(b[u]) > 0) used[a] += bott;
            else used[g.reverse_arc(a)] -= bott;
            v = u;
        }
        flow += bott;
    }
    if (flow != total) throw Error(ErrorKind::NoFlow, "surplus cannot reach deficits in one hop");
    for (std::size_t a = 0; a < g.num_arcs(); ++a) out[a] = used[a];
    return out;
}

}  // namespace

ArcFlow solve_msf(const Graph& g, const MsfProblem& p, MsfStrategy strategy, RecursiveFlowBuilder* builder) {
    Rational ts = 0, td = 0;
    for (const auto& [v, s] : p.surplus) ts += s;
    for (const auto& [v, d] : p.deficit) td += d;
    if (ts != td) throw Error(ErrorKind::InvalidInput, "total surplus differs from total deficit");
    auto b = p.net(g.num_vertices());
    if (strategy == MsfStrategy::DirectMatching) return direct_matching(g, b);

    if (!builder) throw Error(ErrorKind::InvalidInput, "class decomposition needs a flow builder");
    int j = -1;
    for (int i = 0; i <= builder->nmax(); ++i)
        if (&builder->graph(i).graph == &g) j = i;
    if (j < 0) throw Error(ErrorKind::InvalidInput, "graph is not managed by the builder");
    ArcFlow out(g);
    if (g.num_vertices() <= 1) return out;
    const ClassPartition& P = builder->partition(j);
    std::vector<Rational> rest = b;
    for (std::size_t c = 0; c < P.classes.size(); ++c) {
        Rational mass = 0;
        for (auto v : P.classes[c].members) mass += b[v];
        if (sgn(mass) == 0) continue;
        const ArcFlow& d = builder->distribute(j, static_cast<int>(c) + 1);
        // a negative class mass runs the distribute flow backwards
        if (sgn(mass) > 0) out.add_scaled(d, mass);
        else out.add_scaled(d.reversed(), -mass);
        auto dd = d.divergence();
        for (std::size_t v = 0; v < rest.size(); ++v) rest[v] -= mass * dd[v];
    }
    for (const auto& cls : P.classes) route_on_tree(g, cls.members, rest, out);
    // opposite flows on an arc pair cancel
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
        std::size_t r = g.reverse_arc(a);
        if (a < r) {
            Rational m = std::min(out[a], out[r]);
            if (sgn(m) > 0) {
                out[a] -= m;
                out[r] -= m;
            }
        }
    }
    return out;
}

ArcFlow UniformFlow::aggregate() const {
    ArcFlow agg(*graph);
    for (const auto& f : per_source) agg += f;
    return agg;
}

bool UniformFlow::certify() const {
    const std::size_t nv = graph->num_vertices();
    if (per_source.size() != nv) return false;
    for (std::size_t s = 0; s < nv; ++s) {
        if (!per_source[s].nonnegative()) return false;
        auto d = per_source[s].divergence();
        for (std::size_t v = 0; v < nv; ++v) {
            Rational want = v == s ? Rational(static_cast<long>(nv) - 1) : Rational(-1);
            if (d[v] != want) return false;
        }
    }
    return true;
}

std::size_t ProductGraph::index(const std::vector<std::size_t>& c) const {
    std::size_t v = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) v = v * dims[i] + c[i];
    return v;
}

std::vector<std::size_t> ProductGraph::coords(std::size_t v) const {
    std::vector<std::size_t> c(dims.size());
    for (std::size_t i = dims.size(); i-- > 0;) {
        c[i] = v % dims[i];
        v /= dims[i];
    }
    return c;
}

ProductGraph cartesian_product(const std::vector<const Graph*>& factors) {
    ProductGraph p;
    std::size_t total = 1;
    for (auto f : factors) {
        p.dims.push_back(f->num_vertices());
        total *= f->num_vertices();
    }
    std::vector<std::vector<std::uint32_t>> adj(total);
    for (std::size_t v = 0; v < total; ++v) {
        auto c = p.coords(v);
        for (std::size_t i = 0; i < factors.size(); ++i)
            for (auto w : factors[i]->neighbors(c[i])) {
                auto d = c;
                d[i] = w;
                adj[v].push_back(static_cast<std::uint32_t>(p.index(d)));
            }
    }
    p.graph = Graph::from_adjacency(adj);
    return p;
}

namespace {

UniformFlow combine_two(const UniformFlow& G, const UniformFlow& H, const Graph& P) {
    const std::size_t ng = G.graph->num_vertices(), nh = H.graph->num_vertices();
    if (P.num_vertices() != ng * nh) throw Error(ErrorKind::DimensionMismatch, "product size mismatch");
    // arc maps for copies of each factor
    auto gmap = [&](std::size_t a, std::size_t h) {
        return P.arc_index(G.graph->arc_tail(a) * nh + h, G.graph->arc_head(a) * nh + h);
    };
    auto hmap = [&](std::size_t a, std::size_t g) {
        return P.arc_index(g * nh + H.graph->arc_tail(a), g * nh + H.graph->arc_head(a));
    };
    std::vector<std::size_t> gm(G.graph->num_arcs() * nh), hm(H.graph->num_arcs() * ng);
    for (std::size_t h = 0; h < nh; ++h)
        for (std::size_t a = 0; a < G.graph->num_arcs(); ++a) gm[h * G.graph->num_arcs() + a] = gmap(a, h);
    for (std::size_t g = 0; g < ng; ++g)
        for (std::size_t a = 0; a < H.graph->num_arcs(); ++a) hm[g * H.graph->num_arcs() + a] = hmap(a, g);
    for (auto x : gm)
        if (x == P.num_arcs()) throw Error(ErrorKind::DimensionMismatch, "product lacks a factor edge");
    for (auto x : hm)
        if (x == P.num_arcs()) throw Error(ErrorKind::DimensionMismatch, "product lacks a factor edge");

    UniformFlow out;
    out.graph = &P;
    out.per_source.reserve(ng * nh);
    const Rational gsize(static_cast<long>(ng));
    for (std::size_t g0 = 0; g0 < ng; ++g0)
        for (std::size_t h0 = 0; h0 < nh; ++h0) {
            ArcFlow f(P);
            const ArcFlow& fh = H.per_source[h0];
            for (std::size_t a = 0; a < fh.size(); ++a)
                if (sgn(fh[a]) != 0) f[hm[g0 * H.graph->num_arcs() + a]] += gsize * fh[a];
            const ArcFlow& fg = G.per_source[g0];
            for (std::size_t h = 0; h < nh; ++h)
                for (std::size_t a = 0; a < fg.size(); ++a)
                    if (sgn(fg[a]) != 0) f[gm[h * G.graph->num_arcs() + a]] += fg[a];
            out.per_source.push_back(std::move(f));
        }
    return out;
}

}  // namespace

UniformFlow cartesian_flow_combine(const std::vector<const UniformFlow*>& factors, const ProductGraph& product) {
    if (factors.empty() || factors.size() != product.dims.size())
        throw Error(ErrorKind::DimensionMismatch, "factor count differs from product dimension");
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (factors[i]->graph->num_vertices() != product.dims[i] || factors[i]->per_source.size() != product.dims[i])
            throw Error(ErrorKind::DimensionMismatch, "factor size differs from product dimension");
    if (factors.size() == 1) {
        UniformFlow u;
        u.graph = &product.graph;
        for (const auto& f : factors[0]->per_source) {
            ArcFlow g(product.graph);
            for (std::size_t a = 0; a < f.size(); ++a) g[a] = f[a];
            u.per_source.push_back(std::move(g));
        }
        return u;
    }
    // left fold through intermediate products
    std::vector<std::unique_ptr<ProductGraph>> keep;
    UniformFlow acc = *factors[0];
    std::vector<const Graph*> gs{factors[0]->graph};
    for (std::size_t i = 1; i < factors.size(); ++i) {
        gs.push_back(factors[i]->graph);
        const Graph* target;
        if (i + 1 == factors.size()) {
            target = &product.graph;
        } else {
            keep.push_back(std::make_unique<ProductGraph>(cartesian_product(gs)));
            target = &keep.back()->graph;
        }
        acc = combine_two(acc, *factors[i], *target);
    }
    return acc;
}

}  // namespace flipwalk
