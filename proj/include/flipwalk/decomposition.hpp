#pragma once

#include "flipwalk/combinatorics.hpp"
#include "flipwalk/kangulation.hpp"

#include <map>
#include <memory>
#include <optional>

#include <json.hpp>

namespace flipwalk {

enum class PartitionKind { Oriented, Central };

// Sub-polygon start, start+1, ..., start+span (mod m) of a class polygon.
// Relabelled to 0..span it is a k-angulation problem whose special edge is (span, 0).
struct Factor {
    int k = 3;
    int n = 0;
    int start = 0;
    int span = 1;
};

struct ClassDescriptor {
    std::vector<int> polygon;             // class k-gon, increasing vertex order
    std::vector<Factor> factors;          // oriented: {left, right}; central: arcs from polygon[0]
    std::vector<std::uint32_t> members;   // row-major in factor coordinates
    int apex = 0;                          // oriented only

    std::size_t size() const { return members.size(); }
};

struct BoundaryMatching {
    std::uint32_t class_a = 0;
    std::uint32_t class_b = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (in a, in b)
    std::vector<std::uint32_t> boundary_a;
    std::vector<std::uint32_t> boundary_b;
};

struct ClassPartition {
    PartitionKind kind = PartitionKind::Oriented;
    const FlipGraph* graph = nullptr;
    std::vector<ClassDescriptor> classes;
    std::vector<std::uint32_t> vertex_class;
    std::vector<std::vector<std::uint32_t>> coords;  // per vertex, factor-state indices
    std::map<std::pair<int, int>, std::shared_ptr<const FlipGraph>> factor_graphs;

    const FlipGraph& factor_graph(const Factor& f) const { return *factor_graphs.at({f.k, f.n}); }
    // position of a member inside its class from its coordinates
    std::size_t member_position(std::uint32_t cls, const std::vector<std::uint32_t>& c) const;
};

ClassPartition oriented_partition(const FlipGraph& g);
ClassPartition central_partition(const FlipGraph& g);

// apex of the triangle on the special edge (m-1, 0)
int oriented_apex(const KAngulation& t);
// central face under the fixed symbolic perturbation of the center toward edge (0,1)
std::vector<int> central_polygon(const KAngulation& t);
bool contains_perturbed_center(int m, const std::vector<int>& polygon);

// restriction of t to a sub-polygon, relabelled to 0..span
KAngulation restrict_to(const KAngulation& t, const Factor& f);

// induced subgraph of each class equals the product of its factor graphs
void verify_cartesian_structure(const ClassPartition& p);

// oriented: every pair; central: every pair, empty matchings included
std::vector<BoundaryMatching> boundary_matchings(const ClassPartition& p);

// every graph edge is intra-class or in exactly one matching
void verify_edge_classification(const ClassPartition& p, const std::vector<BoundaryMatching>& ms);

// closed forms for the oriented partition of K_n, apexes 1..n
BigCount oriented_class_size(int n, int apex);
BigCount oriented_matching_size(int n, int apex_a, int apex_b);

struct MatchingInequalityReport {
    std::size_t pairs_checked = 0;
    // largest |C(T)||C(T')| / (|E(T,T')| C_n); the inequality is slack <= 1
    Rational max_slack;
    int worst_a = 0;
    int worst_b = 0;
};

MatchingInequalityReport verify_matching_inequality(const ClassPartition& p);
MatchingInequalityReport verify_matching_inequality_closed_form(int n);

struct BoundaryProjection {
    int factor_index = 0;   // 0 left, 1 right
    Factor factor;
    int sub_apex = 0;       // apex of the oriented sub-class inside the factor polygon
    std::size_t sub_class_size = 0;
    bool verified = false;
};

BoundaryProjection boundary_projection(const ClassPartition& p, std::uint32_t a, std::uint32_t b);

// Class-level view of the central partition computed from polygon geometry and
// Fuss-Catalan products only, without materializing the flip graph.
struct CentralClassLevel {
    int k = 3;
    int n = 0;
    int m = 0;
    std::vector<std::vector<int>> polygons;  // lexicographic, same order as central_partition
    std::vector<BigCount> sizes;
    // directed edge counts (a, b) -> |E(T_a, T_b)|; symmetric by construction
    std::map<std::pair<std::uint32_t, std::uint32_t>, BigCount> edges;
};

CentralClassLevel central_class_structure(int k, int n);

nlohmann::json to_json(const ClassPartition& p, const std::vector<BoundaryMatching>& ms, bool full_edges = false);

}  // namespace flipwalk
