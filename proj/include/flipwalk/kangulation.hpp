#pragma once

#include "flipwalk/graph.hpp"

#include <compare>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace flipwalk {

inline constexpr std::uint64_t kDefaultEnumerationCap = 5'000'000;

struct Diagonal {
    int a = 0;
    int b = 0;
    auto operator<=>(const Diagonal&) const = default;
};

// both endpoints distinct, four-point interleaving on the circle
bool crosses(Diagonal d, Diagonal e);

// m = (k-2)n + 2
int polygon_size(int k, int n);

struct KAngulation {
    int k = 3;
    int m = 0;
    std::vector<Diagonal> diagonals;  // sorted, each with a < b

    int n() const { return (m - 2) / (k - 2); }
    bool operator==(const KAngulation&) const = default;
    auto operator<=>(const KAngulation& o) const { return diagonals <=> o.diagonals; }

    // faces as counterclockwise vertex lists
    std::vector<std::vector<int>> faces() const;
    bool valid() const;
    bool has_diagonal(int a, int b) const;
    std::string key() const;
    std::string to_string() const;
};

KAngulation make_kangulation(int k, int m, std::vector<Diagonal> diagonals);

struct Flip {
    KAngulation result;
    Diagonal removed;
    Diagonal inserted;
};

std::vector<KAngulation> enumerate(int k, int n, std::uint64_t cap = kDefaultEnumerationCap);
std::vector<Flip> flips(const KAngulation& t);

// image of t under the dihedral symmetry x -> (s*x + r) mod m, s = +-1
KAngulation dihedral_image(const KAngulation& t, int r, bool reflect);

struct ArcLabel {
    Diagonal removed;
    Diagonal inserted;
};

struct FlipGraph {
    int k = 3;
    int n = 0;
    int m = 0;
    std::vector<KAngulation> vertices;
    Graph graph;
    std::vector<ArcLabel> arc_labels;  // indexed by arc id

    std::size_t size() const { return vertices.size(); }
    // returns size() when absent
    std::size_t index_of(const KAngulation& t) const;
    void rebuild_index();

private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

FlipGraph build_flip_graph(int k, int n, std::uint64_t cap = kDefaultEnumerationCap);

// smallest index in each orbit of the dihedral group acting on the polygon
std::vector<std::uint32_t> dihedral_orbit_representatives(const FlipGraph& g);
// exact diameter; eccentricities computed once per dihedral orbit
int flip_graph_diameter(const FlipGraph& g);

nlohmann::json to_json(const FlipGraph& g);
FlipGraph flip_graph_from_json(const nlohmann::json& j);
std::string to_dot(const FlipGraph& g);

}  // namespace flipwalk
