#pragma once

#include "flipwalk/graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace flipwalk {

// Points of the n x n grid are indexed x + n y.
using Segment = std::pair<int, int>;  // first < second

struct LatticeTriangulation {
    int n = 0;
    std::vector<Segment> edges;  // sorted

    std::size_t triangle_count() const;
    bool has_edge(int a, int b) const;
    std::string key() const;
    std::string to_string() const;
    auto operator<=>(const LatticeTriangulation&) const = default;
};

// every cell cut by the diagonal (x, y+1)-(x+1, y)
LatticeTriangulation canonical_lattice(int n);
// edge count of a full triangulation of the n x n grid
std::size_t lattice_edge_count(int n);
bool primitive(int n, int a, int b);
bool segments_cross(int n, const Segment& s, const Segment& t);

struct LatticeFlip {
    LatticeTriangulation result;
    Segment removed;
    Segment inserted;
};

// flips of interior edges whose two faces form a strictly convex quadrilateral;
// edges listed in `fixed` are never removed
std::vector<LatticeFlip> flips_lattice(const LatticeTriangulation& t, const std::vector<Segment>& fixed = {});

struct LatticeFlipGraph {
    int n = 0;
    std::vector<LatticeTriangulation> vertices;  // sorted
    Graph graph;
    std::vector<Segment> fixed;
    std::unordered_map<std::string, std::uint32_t> index;

    std::size_t size() const { return vertices.size(); }
    // size() when absent
    std::size_t index_of(const LatticeTriangulation& t) const;
};

// closure of the canonical triangulation under flips avoiding `fixed`
LatticeFlipGraph enumerate_lattice(int n, const std::vector<Segment>& fixed = {});
// independent enumeration: backtracking over primitive segments in index order,
// keeping non-crossing sets that reach the full edge count
std::vector<LatticeTriangulation> enumerate_lattice_direct(int n);

struct ProductSubgraph {
    int n = 0;
    int block = 0;
    LatticeFlipGraph h;
    LatticeFlipGraph block_graph;
    // per vertex of h, the block-graph index of each block's restriction (row-major blocks)
    std::vector<std::vector<std::uint32_t>> coords;
    bool product_verified = false;
};

// Blocks of block x block points; cells between blocks carry their four sides
// and the negative-slope diagonal, all fixed.
ProductSubgraph product_subgraph(int n, int block);
std::vector<Segment> product_constraint(int n, int block);

// labelling of vertices by d-bit words with edges exactly at Hamming distance one
std::optional<std::vector<std::uint32_t>> hypercube_labelling(const Graph& g);

nlohmann::json to_json(const LatticeFlipGraph& g);
std::string to_dot(const LatticeFlipGraph& g);

}  // namespace flipwalk
