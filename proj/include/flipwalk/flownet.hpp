#pragma once

#include "flipwalk/decomposition.hpp"
#include "flipwalk/graph.hpp"

#include <map>
#include <memory>
#include <optional>
#include <tuple>

#include <json.hpp>

namespace flipwalk {

// Per-arc flow on one graph, both directions stored, exact.
class ArcFlow {
public:
    ArcFlow() = default;
    explicit ArcFlow(const Graph& g) : graph_(&g), value_(g.num_arcs()) {}

    const Graph& graph() const { return *graph_; }
    std::size_t size() const { return value_.size(); }
    Rational& operator[](std::size_t arc) { return value_[arc]; }
    const Rational& operator[](std::size_t arc) const { return value_[arc]; }

    ArcFlow& operator+=(const ArcFlow& o);
    void add_scaled(const ArcFlow& o, const Rational& c);
    void scale(const Rational& c);
    ArcFlow reversed() const;
    // out-flow minus in-flow per vertex
    std::vector<Rational> divergence() const;
    bool nonnegative() const;
    std::size_t support() const;

private:
    const Graph* graph_ = nullptr;
    std::vector<Rational> value_;
};

enum class Normalization { Uniform, Chain };

struct CongestionReport {
    Rational rho;
    std::size_t argmax_arc = 0;
    std::uint32_t argmax_u = 0;
    std::uint32_t argmax_v = 0;
    Normalization normalization = Normalization::Uniform;
    std::vector<Rational> levels;
};

// rho = max_arc f(arc) / |V|
CongestionReport uniform_congestion(const ArcFlow& aggregate);
// lazy max-degree chain weighting: max_arc (f / |V|^2) / (Delta Q), Q = 1 / (2 Delta |V|)
CongestionReport chain_congestion(const ArcFlow& aggregate);
nlohmann::json to_json(const CongestionReport& r);

// 1 / (2 rho)
Rational expansion_lower_bound(const CongestionReport& r);

struct MsfProblem {
    std::map<std::uint32_t, Rational> surplus;  // sources S with sigma
    std::map<std::uint32_t, Rational> deficit;  // sinks T with delta
    // sigma - delta per vertex, zero outside S and T
    std::vector<Rational> net(std::size_t num_vertices) const;
};

enum class MsfStrategy { DirectMatching, ThroughClassDecomposition };

class RecursiveFlowBuilder;

// DirectMatching moves each surplus to adjacent deficits in a single hop (exact
// max-flow on the bipartite S->T edges). ThroughClassDecomposition needs an
// oriented partition: class-level imbalance goes through the distribute flows,
// the within-class remainder along a spanning tree of the class.
ArcFlow solve_msf(const Graph& g, const MsfProblem& p, MsfStrategy strategy, RecursiveFlowBuilder* builder = nullptr);
bool certify_msf(const ArcFlow& f, const MsfProblem& p);

// spanning-tree routing of a zero-sum net demand inside `vertices`
void route_on_tree(const Graph& g, const std::vector<std::uint32_t>& vertices, const std::vector<Rational>& net,
                   ArcFlow& out);

// Per-source uniform flows: per_source[s] sends one unit from s to every other vertex.
struct UniformFlow {
    const Graph* graph = nullptr;
    std::vector<ArcFlow> per_source;

    ArcFlow aggregate() const;
    // exact check of every (s, t) demand
    bool certify() const;
    CongestionReport congestion() const { return uniform_congestion(aggregate()); }
};

struct ProductGraph {
    Graph graph;
    std::vector<std::size_t> dims;  // row-major, first factor most significant
    std::size_t index(const std::vector<std::size_t>& c) const;
    std::vector<std::size_t> coords(std::size_t v) const;
};

ProductGraph cartesian_product(const std::vector<const Graph*>& factors);

// two-stage routing: the last factor first inside the source's copy, then the
// earlier factors inside every copy; folds left for more than two factors
UniformFlow cartesian_flow_combine(const std::vector<const UniformFlow*>& factors, const ProductGraph& product);

// Recursive concentrate / transmit / distribute construction on K_j, j <= nmax,
// with the oriented partition at every level.
class RecursiveFlowBuilder {
public:
    explicit RecursiveFlowBuilder(int nmax);

    int nmax() const { return nmax_; }
    const FlipGraph& graph(int j) const { return *graphs_.at(j); }
    const ClassPartition& partition(int j) const { return *partitions_.at(j); }

    // unit mass uniform on class `apex` to uniform on V(K_j)
    const ArcFlow& distribute(int j, int apex);
    // unit mass uniform on class u to uniform on class u2 through their matching
    ArcFlow transfer(int j, int u, int u2);
    // sum over all sources of the uniform flow on K_j
    const ArcFlow& aggregate_uniform(int j);
    // single-source uniform flow on K_j (memoized for j < nmax)
    const ArcFlow& commodity(int j, std::uint32_t s);
    UniformFlow uniform_flow(int j);

    // matching arcs of K_j from class u to class u2 (apex indices)
    const std::vector<std::size_t>& matching_arcs(int j, int u, int u2);

    // embed a factor flow into every (or one) copy of a class of K_j
    void embed_factor(ArcFlow& out, int j, int apex, int factor, const ArcFlow& f, const Rational& c,
                      std::optional<std::uint32_t> other = std::nullopt, bool reverse = false);

private:
    void add_transfer(ArcFlow& out, int j, int u, int u2, const Rational& c);
    const std::vector<std::size_t>& embed_map(int j, int apex, int factor);

    int nmax_;
    std::map<std::tuple<int, int, int>, std::vector<std::size_t>> embed_maps_;
    std::map<int, std::shared_ptr<const FlipGraph>> graphs_;
    std::map<int, std::unique_ptr<ClassPartition>> partitions_;
    std::map<std::pair<int, int>, ArcFlow> dist_;
    std::map<int, ArcFlow> agg_;
    std::map<int, std::vector<std::unique_ptr<ArcFlow>>> commodities_;
    std::map<std::tuple<int, int, int>, std::vector<std::size_t>> matchings_;
    std::unique_ptr<ArcFlow> scratch_;
};

struct UniformFlowResult {
    ArcFlow aggregate;
    CongestionReport report;
    bool certified = false;           // every (s, t) demand checked exactly
    std::size_t commodities_checked = 0;
    bool aggregate_consistent = false;  // sum of certified commodities equals the aggregate
    Rational max_matching_arc_flow;   // un-normalized
    bool matching_flow_within_cn = false;
};

// certify = false builds the aggregate only (conservation of the aggregate is still checked)
UniformFlowResult uniform_flow_recursive(RecursiveFlowBuilder& b, int n, bool certify);

// Combination of restriction and projection flows on a lazy
// max-degree walk. Every congestion is f / (Delta * Q) with the chain's Delta.
struct ProjectionFlow {
    Graph quotient;
    // commodity (i, j) routed along one quotient path; amounts must be pibar(i) pibar(j)
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> paths;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Rational> amount;
};

struct CombinerInput {
    const Graph* graph = nullptr;
    std::vector<std::uint32_t> vertex_class;
    // restriction flows on the class-induced subgraphs; local vertex i is the
    // i-th smallest member of the class
    std::vector<const UniformFlow*> restriction;
};

ProjectionFlow projection_flow_direct(const CombinerInput& in);

struct CombinerResult {
    ArcFlow flow;
    CongestionReport report;   // measured, chain normalization
    Rational rho_bar;
    Rational gamma;
    Rational rho_max;
    std::vector<Rational> restriction_rho;
    Rational bound;            // (1 + 2 rho_bar gamma Delta) rho_max
    std::size_t delta = 0;
    bool certified = false;
    bool within_bound = false;
};

CombinerResult projection_restriction_combine(const CombinerInput& in, const ProjectionFlow& proj);

// Restriction flows of the oriented classes of K_n from the recursive builder.
struct OrientedCombinerSetup {
    std::vector<ProductGraph> class_graphs;
    std::vector<UniformFlow> class_flows;
    CombinerInput input;
};
std::unique_ptr<OrientedCombinerSetup> oriented_combiner_setup(RecursiveFlowBuilder& b, int n);

// Dyadic pairing of the oriented classes: at a group G split into halves L, R
// (|L| = ceil), every class sends across to the other half.
struct PairingResult {
    int n = 0;
    std::vector<Rational> level_max;  // per depth, normalized by C_n
    Rational total;                   // sum of per-level maxima
    Rational overall_max;             // max over matching arcs
    bool certified = false;
    std::size_t commodities_checked = 0;
};

PairingResult hierarchical_pairing_closed_form(int n);
PairingResult hierarchical_pairing_flow(RecursiveFlowBuilder& b, int n);
nlohmann::json to_json(const PairingResult& r);

}  // namespace flipwalk
