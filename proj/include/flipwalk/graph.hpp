#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace flipwalk {

// Undirected simple graph in CSR form. Each undirected edge appears as two
// arcs; arc ids are positions in the neighbor array, neighbors sorted.
class Graph {
public:
    Graph() = default;
    static Graph from_adjacency(const std::vector<std::vector<std::uint32_t>>& adj);
    static Graph from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

    std::size_t num_vertices() const { return offset_.empty() ? 0 : offset_.size() - 1; }
    std::size_t num_arcs() const { return nbr_.size(); }
    std::size_t num_edges() const { return nbr_.size() / 2; }
    std::size_t degree(std::size_t v) const { return offset_[v + 1] - offset_[v]; }
    std::size_t max_degree() const;
    bool is_regular() const;

    std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {nbr_.data() + offset_[v], nbr_.data() + offset_[v + 1]};
    }
    std::size_t arc_begin(std::size_t v) const { return offset_[v]; }
    std::uint32_t arc_head(std::size_t a) const { return nbr_[a]; }
    std::uint32_t arc_tail(std::size_t a) const { return tail_[a]; }
    // returns num_arcs() when u, v are not adjacent
    std::size_t arc_index(std::size_t u, std::size_t v) const;
    std::size_t reverse_arc(std::size_t a) const { return rev_[a]; }

    bool connected() const;
    std::vector<int> bfs_distances(std::size_t src) const;
    bool symmetric() const;
    // eccentricity of each source, 64 sources per bit-parallel sweep; -1 if disconnected
    std::vector<int> eccentricities(const std::vector<std::uint32_t>& sources) const;
    int diameter() const;

private:
    void finish();
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> nbr_;
    std::vector<std::uint32_t> tail_;
    std::vector<std::uint32_t> rev_;
};

}  // namespace flipwalk
