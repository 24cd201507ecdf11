#include "flipwalk/error.hpp"
#include "flipwalk/flownet.hpp"

#include <algorithm>
#include <deque>

namespace flipwalk {

namespace {

Rational whole(std::size_t a) { return Rational(static_cast<unsigned long>(a)); }

struct ClassView {
    std::vector<std::vector<std::uint32_t>> members;   // sorted
    std::vector<std::uint32_t> local;                   // global vertex -> local index
    std::vector<std::vector<std::size_t>> arc_map;      // class -> local arc -> global arc
};

ClassView make_view(const CombinerInput& in) {
    const Graph& G = *in.graph;
    std::size_t nc = 0;
    for (auto c : in.vertex_class) nc = std::max<std::size_t>(nc, c + 1);
    if (in.vertex_class.size() != G.num_vertices()) throw Error(ErrorKind::InvalidInput, "class labels size mismatch");
    if (in.restriction.size() != nc) throw Error(ErrorKind::InvalidInput, "one restriction flow per class required");
    ClassView cv;
    cv.members.resize(nc);
    cv.local.resize(G.num_vertices());
    for (std::uint32_t v = 0; v < G.num_vertices(); ++v) {
        cv.local[v] = static_cast<std::uint32_t>(cv.members[in.vertex_class[v]].size());
        cv.members[in.vertex_class[v]].push_back(v);
    }
    cv.arc_map.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const UniformFlow* u = in.restriction[c];
        const Graph& L = *u->graph;
        if (L.num_vertices() != cv.members[c].size())
            throw Error(ErrorKind::InvalidInput, "restriction flow has the wrong number of states");
        std::size_t intra = 0;
        for (auto v : cv.members[c])
            for (auto w : G.neighbors(v))
                if (in.vertex_class[w] == c) ++intra;
        if (intra != L.num_arcs()) throw Error(ErrorKind::InvalidInput, "restriction graph is not the induced subgraph");
        for (std::size_t a = 0; a < L.num_arcs(); ++a) {
            std::size_t ga = G.arc_index(cv.members[c][L.arc_tail(a)], cv.members[c][L.arc_head(a)]);
            if (ga == G.num_arcs()) throw Error(ErrorKind::InvalidInput, "restriction edge absent from the chain");
            cv.arc_map[c].push_back(ga);
        }
    }
    return cv;
}

}  // namespace

ProjectionFlow projection_flow_direct(const CombinerInput& in) {
    const Graph& G = *in.graph;
    std::size_t nc = 0;
    for (auto c : in.vertex_class) nc = std::max<std::size_t>(nc, c + 1);
    std::vector<std::size_t> size(nc);
    for (auto c : in.vertex_class) ++size[c];
    std::vector<std::pair<std::uint32_t, std::uint32_t>> qe;
    for (std::size_t a = 0; a < G.num_arcs(); ++a) {
        auto x = in.vertex_class[G.arc_tail(a)], y = in.vertex_class[G.arc_head(a)];
        if (x < y) qe.push_back({x, y});
    }
    std::sort(qe.begin(), qe.end());
    qe.erase(std::unique(qe.begin(), qe.end()), qe.end());
    ProjectionFlow p;
    p.quotient = Graph::from_edges(nc, qe);
    const std::size_t nv = G.num_vertices();
    for (std::uint32_t i = 0; i < nc; ++i) {
        // BFS parents give a shortest path; ties broken by smallest class index
        std::vector<std::int64_t> parent(nc, -2);
        parent[i] = -1;
        std::deque<std::uint32_t> q{i};
        while (!q.empty()) {
            auto x = q.front();
            q.pop_front();
            for (auto y : p.quotient.neighbors(x))
                if (parent[y] == -2) {
                    parent[y] = x;
                    q.push_back(y);
                }
        }
        for (std::uint32_t j = 0; j < nc; ++j) {
            if (i == j) continue;
            if (parent[j] == -2) throw Error(ErrorKind::NoFlow, "quotient graph is disconnected");
            std::vector<std::uint32_t> path;
            for (std::int64_t x = j; x != -1; x = parent[x]) path.push_back(static_cast<std::uint32_t>(x));
            std::reverse(path.begin(), path.end());
            p.paths[{i, j}] = path;
            Rational amt(static_cast<unsigned long>(size[i] * size[j]), static_cast<unsigned long>(nv * nv));
            amt.canonicalize();
            p.amount[{i, j}] = amt;
        }
    }
    return p;
}

CombinerResult projection_restriction_combine(const CombinerInput& in, const ProjectionFlow& proj) {
    const Graph& G = *in.graph;
    ClassView cv = make_view(in);
    const std::size_t nc = cv.members.size();
    const std::size_t nv = G.num_vertices();
    const std::size_t delta = G.max_degree();
    CombinerResult r;
    r.delta = delta;
    r.flow = ArcFlow(G);
    // lazy max-degree walk: pi = 1/|V|, P(x,y) = 1/(2 Delta), Q = pi P
    const Rational Q = Rational(1) / (whole(nv) * whole(2 * delta));
    std::vector<Rational> pibar(nc);
    for (std::size_t c = 0; c < nc; ++c) pibar[c] = whole(cv.members[c].size()) / whole(nv);

    // cut arcs between classes
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> cut;
    for (std::size_t a = 0; a < G.num_arcs(); ++a) {
        auto x = in.vertex_class[G.arc_tail(a)], y = in.vertex_class[G.arc_head(a)];
        if (x != y) cut[{x, y}].push_back(a);
    }

    // escape probability
    r.gamma = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        std::size_t out = 0;
        for (auto w : G.neighbors(v))
            if (in.vertex_class[w] != in.vertex_class[v]) ++out;
        { Rational g = whole(out) / whole(2 * delta); if (g > r.gamma) r.gamma = g; }
    }

    // restriction congestion with Q_i = Q / pibar(i)
    r.rho_max = 0;
    std::vector<ArcFlow> agg(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const UniformFlow& u = *in.restriction[c];
        agg[c] = u.aggregate();
        const Rational sz = whole(cv.members[c].size());
        Rational best = 0;
        for (std::size_t a = 0; a < agg[c].size(); ++a) {
            // f_i = U / |Omega_i|^2, Delta Q_i = Delta Q / pibar
            Rational cong = (agg[c][a] / (sz * sz)) / (whole(delta) * Q / pibar[c]);
            if (cong > best) best = cong;
        }
        r.restriction_rho.push_back(best);
        if (best > r.rho_max) r.rho_max = best;
    }

    // projection: validate, aggregate on the quotient, congestion
    ArcFlow qflow(proj.quotient);
    for (std::uint32_t i = 0; i < nc; ++i)
        for (std::uint32_t j = 0; j < nc; ++j) {
            if (i == j) continue;
            auto pit = proj.paths.find({i, j});
            auto ait = proj.amount.find({i, j});
            if (pit == proj.paths.end() || ait == proj.amount.end())
                throw Error(ErrorKind::InvalidInput, "projection flow misses a commodity");
            const auto& path = pit->second;
            if (path.size() < 2 || path.front() != i || path.back() != j || ait->second != pibar[i] * pibar[j])
                throw Error(ErrorKind::InvalidInput, "projection flow is unbalanced");
            for (std::size_t t = 0; t + 1 < path.size(); ++t) {
                std::size_t qa = proj.quotient.arc_index(path[t], path[t + 1]);
                if (qa == proj.quotient.num_arcs() || cut[{path[t], path[t + 1]}].empty())
                    throw Error(ErrorKind::InvalidInput, "projection path uses a non-edge");
                qflow[qa] += ait->second;
            }
        }
    r.rho_bar = 0;
    for (std::size_t qa = 0; qa < qflow.size(); ++qa) {
        auto x = proj.quotient.arc_tail(qa), y = proj.quotient.arc_head(qa);
        Rational qbar = whole(cut[{x, y}].size()) * Q;
        { Rational c = qflow[qa] / (whole(delta) * qbar); if (c > r.rho_bar) r.rho_bar = c; }
    }

    // intra-class commodities: pibar(i)^2 f_i
    bool ok = true;
    for (std::size_t c = 0; c < nc; ++c) {
        const UniformFlow& u = *in.restriction[c];
        const Rational sz = whole(cv.members[c].size());
        const Rational w = pibar[c] * pibar[c] / (sz * sz);
        for (std::size_t a = 0; a < agg[c].size(); ++a)
            if (sgn(agg[c][a]) != 0) r.flow[cv.arc_map[c][a]] += w * agg[c][a];
        if (!u.certify()) ok = false;
    }

    // inter-class commodities, certified one class pair at a time
    for (std::uint32_t i = 0; i < nc; ++i)
        for (std::uint32_t j = 0; j < nc; ++j) {
            if (i == j) continue;
            const auto& path = proj.paths.at({i, j});
            const Rational amt = proj.amount.at({i, j});
            ArcFlow phi(G);
            std::vector<Rational> in_mass(nv), out_mass(nv);
            for (std::size_t t = 0; t + 1 < path.size(); ++t) {
                const auto& arcs = cut[{path[t], path[t + 1]}];
                // F Q(x,y) / Qbar with uniform Q on cut arcs
                Rational per = amt / whole(arcs.size());
                for (auto a : arcs) {
                    phi[a] += per;
                    out_mass[G.arc_tail(a)] += per;
                    in_mass[G.arc_head(a)] += per;
                }
            }
            for (std::size_t t = 0; t < path.size(); ++t) {
                const std::uint32_t c = path[t];
                const UniformFlow& u = *in.restriction[c];
                const Rational sz = whole(cv.members[c].size());
                for (auto z : cv.members[c]) {
                    const std::uint32_t lz = cv.local[z];
                    // spread what arrives at z over the class in proportion to pi_c
                    if (sgn(in_mass[z]) != 0) {
                        const ArcFlow& f = u.per_source[lz];
                        Rational s = in_mass[z] / sz;
                        for (std::size_t a = 0; a < f.size(); ++a)
                            if (sgn(f[a]) != 0) phi[cv.arc_map[c][a]] += s * f[a];
                    }
                    // gather from the pi_c-distribution what leaves at z
                    if (sgn(out_mass[z]) != 0) {
                        const ArcFlow& f = u.per_source[lz];
                        Rational s = out_mass[z] / sz;
                        for (std::size_t a = 0; a < f.size(); ++a)
                            if (sgn(f[a]) != 0) phi[G.reverse_arc(cv.arc_map[c][a])] += s * f[a];
                    }
                }
            }
            auto d = phi.divergence();
            for (std::size_t v = 0; v < nv; ++v) {
                Rational want = 0;
                if (in.vertex_class[v] == i) want += pibar[j] / whole(nv);
                if (in.vertex_class[v] == j) want -= pibar[i] / whole(nv);
                if (d[v] != want) ok = false;
            }
            r.flow += phi;
        }
    r.certified = ok;

    r.report.normalization = Normalization::Chain;
    r.report.rho = 0;
    for (std::size_t a = 0; a < G.num_arcs(); ++a) {
        Rational c = r.flow[a] / (whole(delta) * Q);
        if (c > r.report.rho) {
            r.report.rho = c;
            r.report.argmax_arc = a;
            r.report.argmax_u = G.arc_tail(a);
            r.report.argmax_v = G.arc_head(a);
        }
    }
    r.bound = (1 + 2 * r.rho_bar * r.gamma * whole(delta)) * r.rho_max;
    r.within_bound = r.report.rho <= r.bound;
    return r;
}

std::unique_ptr<OrientedCombinerSetup> oriented_combiner_setup(RecursiveFlowBuilder& b, int n) {
    auto s = std::make_unique<OrientedCombinerSetup>();
    const ClassPartition& P = b.partition(n);
    const std::size_t nc = P.classes.size();
    s->class_graphs.reserve(nc);
    s->class_flows.reserve(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& C = P.classes[c];
        const int jl = C.factors[0].n, jr = C.factors[1].n;
        s->class_graphs.push_back(cartesian_product({&b.graph(jl).graph, &b.graph(jr).graph}));
    }
    std::vector<UniformFlow> factor_flows;
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& C = P.classes[c];
        UniformFlow l = b.uniform_flow(C.factors[0].n);
        UniformFlow r = b.uniform_flow(C.factors[1].n);
        s->class_flows.push_back(cartesian_flow_combine({&l, &r}, s->class_graphs[c]));
        // members are row-major in (left, right), so local order equals sorted order only after a check
        std::vector<std::uint32_t> sorted = C.members;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != C.members) {
            // reorder the product flow to the sorted member order
            std::vector<std::uint32_t> pos(C.members.size());
            for (std::size_t i = 0; i < C.members.size(); ++i)
                pos[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), C.members[i]) - sorted.begin());
            std::vector<std::vector<std::uint32_t>> adj(C.members.size());
            const Graph pg = s->class_graphs[c].graph;
            for (std::size_t v = 0; v < pg.num_vertices(); ++v)
                for (auto w : pg.neighbors(v)) adj[pos[v]].push_back(pos[w]);
            ProductGraph relabelled;
            relabelled.graph = Graph::from_adjacency(adj);
            relabelled.dims = s->class_graphs[c].dims;
            UniformFlow uf;
            uf.per_source.resize(C.members.size());
            const UniformFlow& old = s->class_flows.back();
            s->class_graphs[c] = std::move(relabelled);
            uf.graph = &s->class_graphs[c].graph;
            for (std::size_t v = 0; v < C.members.size(); ++v) {
                ArcFlow f(*uf.graph);
                const ArcFlow& o = old.per_source[v];
                for (std::size_t a = 0; a < o.size(); ++a)
                    if (sgn(o[a]) != 0)
                        f[uf.graph->arc_index(pos[pg.arc_tail(a)], pos[pg.arc_head(a)])] = o[a];
                uf.per_source[pos[v]] = std::move(f);
            }
            s->class_flows.back() = std::move(uf);
        }
    }
    s->input.graph = &b.graph(n).graph;
    s->input.vertex_class = P.vertex_class;
    for (auto& f : s->class_flows) s->input.restriction.push_back(&f);
    return s;
}

}  // namespace flipwalk
