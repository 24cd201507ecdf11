#include "flipwalk/error.hpp"
#include "flipwalk/flownet.hpp"

#include <algorithm>

namespace flipwalk {

namespace {
Rational ratio(std::size_t a, std::size_t b) {
    Rational r(static_cast<unsigned long>(a), static_cast<unsigned long>(b));
    r.canonicalize();
    return r;
}
Rational whole(std::size_t a) { return Rational(static_cast<unsigned long>(a)); }
}  // namespace

RecursiveFlowBuilder::RecursiveFlowBuilder(int nmax) : nmax_(nmax) {
    if (nmax < 0) throw Error(ErrorKind::InvalidParameter, "nmax must be nonnegative");
    for (int j = 0; j <= nmax; ++j) graphs_[j] = std::make_shared<const FlipGraph>(build_flip_graph(3, j));
    for (int j = 1; j <= nmax; ++j) {
        auto p = std::make_unique<ClassPartition>(oriented_partition(*graphs_[j]));
        // share the factor graphs so factor flows and class coordinates use one indexing
        for (auto& [key, fg] : p->factor_graphs) {
            auto& mine = graphs_[key.second];
            if (mine->vertices != fg->vertices) throw Error(ErrorKind::StructureMismatch, "factor indexing differs");
            fg = mine;
        }
        partitions_[j] = std::move(p);
    }
}

const std::vector<std::size_t>& RecursiveFlowBuilder::matching_arcs(int j, int u, int u2) {
    auto key = std::make_tuple(j, u, u2);
    auto it = matchings_.find(key);
    if (it != matchings_.end()) return it->second;
    const Graph& G = graph(j).graph;
    const ClassPartition& P = partition(j);
    std::map<std::pair<int, int>, std::vector<std::size_t>> all;
    for (std::size_t a = 0; a < G.num_arcs(); ++a) {
        int cu = static_cast<int>(P.vertex_class[G.arc_tail(a)]) + 1;
        int cv = static_cast<int>(P.vertex_class[G.arc_head(a)]) + 1;
        if (cu != cv) all[{cu, cv}].push_back(a);
    }
    for (int x = 1; x <= j; ++x)
        for (int y = 1; y <= j; ++y)
            if (x != y) matchings_[std::make_tuple(j, x, y)] = all[{x, y}];
    return matchings_.at(key);
}

const std::vector<std::size_t>& RecursiveFlowBuilder::embed_map(int j, int apex, int factor) {
    auto key = std::make_tuple(j, apex, factor);
    auto it = embed_maps_.find(key);
    if (it != embed_maps_.end()) return it->second;
    const ClassPartition& P = partition(j);
    const ClassDescriptor& C = P.classes[apex - 1];
    const Graph& F = P.factor_graph(C.factors[factor]).graph;
    const std::size_t nl = P.factor_graph(C.factors[0]).size(), nr = P.factor_graph(C.factors[1]).size();
    const std::size_t copies = factor == 0 ? nr : nl;
    const Graph& G = graph(j).graph;
    std::vector<std::size_t> map(copies * F.num_arcs());
    for (std::size_t o = 0; o < copies; ++o)
        for (std::size_t a = 0; a < F.num_arcs(); ++a) {
            std::size_t x = F.arc_tail(a), y = F.arc_head(a);
            std::size_t px = factor == 0 ? x * nr + o : o * nr + x;
            std::size_t py = factor == 0 ? y * nr + o : o * nr + y;
            std::size_t ga = G.arc_index(C.members[px], C.members[py]);
            if (ga == G.num_arcs()) throw Error(ErrorKind::StructureMismatch, "factor edge missing in class");
            map[o * F.num_arcs() + a] = ga;
        }
    return embed_maps_.emplace(key, std::move(map)).first->second;
}

void RecursiveFlowBuilder::embed_factor(ArcFlow& out, int j, int apex, int factor, const ArcFlow& f, const Rational& c,
                                        std::optional<std::uint32_t> other, bool reverse) {
    const auto& map = embed_map(j, apex, factor);
    const std::size_t fa = f.size();
    if (fa == 0) return;
    const std::size_t copies = map.size() / fa;
    const Graph& G = graph(j).graph;
    std::size_t lo = 0, hi = copies;
    if (other) {
        lo = *other;
        hi = lo + 1;
    }
    for (std::size_t a = 0; a < fa; ++a) {
        if (sgn(f[a]) == 0) continue;
        Rational v = c * f[a];
        for (std::size_t o = lo; o < hi; ++o) {
            std::size_t ga = map[o * fa + a];
            out[reverse ? G.reverse_arc(ga) : ga] += v;
        }
    }
}

void RecursiveFlowBuilder::add_transfer(ArcFlow& out, int j, int u, int u2, const Rational& c) {
    const ClassPartition& P = partition(j);
    const auto& Cu = P.classes[u - 1];
    const auto& Cu2 = P.classes[u2 - 1];
    auto fsize = [&](const ClassDescriptor& C, int i) { return P.factor_graph(C.factors[i]).size(); };
    const auto& arcs = matching_arcs(j, u, u2);
    int conc_factor, dist_factor, conc_j, conc_w, dist_j, dist_w;
    if (u2 > u) {
        conc_factor = 1;
        conc_j = j - u;
        conc_w = u2 - u;
        dist_factor = 0;
        dist_j = u2 - 1;
        dist_w = u;
    } else {
        conc_factor = 0;
        conc_j = u - 1;
        conc_w = u2;
        dist_factor = 1;
        dist_j = j - u2;
        dist_w = u - u2;
    }
    const std::size_t conc_copies = fsize(Cu, 1 - conc_factor);
    const std::size_t dist_copies = fsize(Cu2, 1 - dist_factor);
    // boundary = other factor x oriented sub-class of the moving factor
    std::size_t sub = conc_j >= 1 ? partition(conc_j).classes[conc_w - 1].size() : 1;
    if (arcs.size() != conc_copies * sub) throw Error(ErrorKind::StructureMismatch, "matching size differs from boundary");

    if (graph(conc_j).size() > 1)
        embed_factor(out, j, u, conc_factor, distribute(conc_j, conc_w), c / whole(conc_copies), std::nullopt, true);
    Rational per = c / whole(arcs.size());
    for (auto a : arcs) out[a] += per;
    if (graph(dist_j).size() > 1)
        embed_factor(out, j, u2, dist_factor, distribute(dist_j, dist_w), c / whole(dist_copies));
}

ArcFlow RecursiveFlowBuilder::transfer(int j, int u, int u2) {
    ArcFlow f(graph(j).graph);
    if (u != u2) add_transfer(f, j, u, u2, Rational(1));
    return f;
}

const ArcFlow& RecursiveFlowBuilder::distribute(int j, int u) {
    auto key = std::make_pair(j, u);
    auto it = dist_.find(key);
    if (it != dist_.end()) return it->second;
    ArcFlow d(graph(j).graph);
    if (graph(j).size() > 1) {
        const ClassPartition& P = partition(j);
        const std::size_t nv = graph(j).size();
        for (int u2 = 1; u2 <= j; ++u2)
            if (u2 != u) add_transfer(d, j, u, u2, ratio(P.classes[u2 - 1].size(), nv));
    }
    return dist_.emplace(key, std::move(d)).first->second;
}

const ArcFlow& RecursiveFlowBuilder::aggregate_uniform(int j) {
    auto it = agg_.find(j);
    if (it != agg_.end()) return it->second;
    ArcFlow agg(graph(j).graph);
    if (graph(j).size() > 1) {
        const ClassPartition& P = partition(j);
        const std::size_t nv = graph(j).size();
        for (int a = 1; a <= j; ++a) {
            const auto& C = P.classes[a - 1];
            const int jl = C.factors[0].n, jr = C.factors[1].n;
            const std::size_t nl = graph(jl).size(), nr = graph(jr).size();
            Rational shuffle = ratio(nv, C.size());
            if (nr > 1) embed_factor(agg, j, a, 1, aggregate_uniform(jr), shuffle * whole(nl));
            if (nl > 1) embed_factor(agg, j, a, 0, aggregate_uniform(jl), shuffle * whole(nr));
            agg.add_scaled(distribute(j, a), whole(nv) * whole(C.size()));
        }
    }
    return agg_.emplace(j, std::move(agg)).first->second;
}

const ArcFlow& RecursiveFlowBuilder::commodity(int j, std::uint32_t s) {
    auto& memo = commodities_[j];
    if (j < nmax_) {
        if (memo.empty()) memo.resize(graph(j).size());
        if (memo[s]) return *memo[s];
    }
    ArcFlow f(graph(j).graph);
    if (graph(j).size() > 1) {
        const ClassPartition& P = partition(j);
        const std::size_t nv = graph(j).size();
        const std::uint32_t cls = P.vertex_class[s];
        const int a = static_cast<int>(cls) + 1;
        const auto& C = P.classes[cls];
        const int jl = C.factors[0].n, jr = C.factors[1].n;
        const std::size_t nl = graph(jl).size(), nr = graph(jr).size();
        const auto l0 = P.coords[s][0], r0 = P.coords[s][1];
        Rational shuffle = ratio(nv, C.size());
        // the class's product flow from s: right factor inside s's copy, then left factor in every copy
        if (nr > 1) embed_factor(f, j, a, 1, commodity(jr, r0), shuffle * whole(nl), l0);
        if (nl > 1) embed_factor(f, j, a, 0, commodity(jl, l0), shuffle);
        f.add_scaled(distribute(j, a), whole(nv));
    }
    if (j < nmax_) {
        memo[s] = std::make_unique<ArcFlow>(std::move(f));
        return *memo[s];
    }
    scratch_ = std::make_unique<ArcFlow>(std::move(f));
    return *scratch_;
}

UniformFlow RecursiveFlowBuilder::uniform_flow(int j) {
    UniformFlow u;
    u.graph = &graph(j).graph;
    for (std::uint32_t s = 0; s < graph(j).size(); ++s) u.per_source.push_back(commodity(j, s));
    return u;
}

UniformFlowResult uniform_flow_recursive(RecursiveFlowBuilder& b, int n, bool certify) {
    UniformFlowResult r;
    const Graph& G = b.graph(n).graph;
    const std::size_t nv = G.num_vertices();
    r.aggregate = b.aggregate_uniform(n);
    auto div = r.aggregate.divergence();
    bool agg_balanced = std::all_of(div.begin(), div.end(), [](const Rational& x) { return sgn(x) == 0; });
    if (!agg_balanced || !r.aggregate.nonnegative())
        throw Error(ErrorKind::LemmaViolation, "aggregate uniform flow is not conserved");
    r.report = uniform_congestion(r.aggregate);

    if (certify) {
        ArcFlow sum(G);
        bool ok = true;
        for (std::uint32_t s = 0; s < nv; ++s) {
            const ArcFlow& f = b.commodity(n, s);
            auto d = f.divergence();
            for (std::size_t v = 0; v < nv && ok; ++v) {
                Rational want = v == s ? Rational(static_cast<long>(nv) - 1) : Rational(-1);
                if (d[v] != want) ok = false;
            }
            if (!f.nonnegative()) ok = false;
            if (!ok) throw Error(ErrorKind::LemmaViolation, "demand of source " + std::to_string(s) + " not met");
            sum += f;
            ++r.commodities_checked;
        }
        r.certified = ok;
        r.aggregate_consistent = true;
        for (std::size_t a = 0; a < G.num_arcs(); ++a)
            if (sum[a] != r.aggregate[a]) r.aggregate_consistent = false;
    }

    r.max_matching_arc_flow = 0;
    for (int u = 1; u <= n; ++u)
        for (int u2 = 1; u2 <= n; ++u2)
            if (u != u2)
                for (auto a : b.matching_arcs(n, u, u2)) r.max_matching_arc_flow = std::max(r.max_matching_arc_flow, r.aggregate[a]);
    r.matching_flow_within_cn = r.max_matching_arc_flow <= Rational(catalan(n));
    return r;
}

}  // namespace flipwalk
