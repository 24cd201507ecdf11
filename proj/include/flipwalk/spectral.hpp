#pragma once

#include "flipwalk/combinatorics.hpp"
#include "flipwalk/graph.hpp"
#include "flipwalk/kangulation.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace flipwalk {

// Lazy walk: stay with probability 1/2, otherwise pick one of `moves` slots
// uniformly; slots beyond the degree also stay. For a flip graph moves is
// (n-1)(k-2), one slot per (diagonal, replacement) pair.
struct Chain {
    const Graph* graph = nullptr;
    const FlipGraph* flips = nullptr;  // enables dihedral symmetry reduction
    std::size_t moves = 0;
    int k = 0;
    int n = 0;

    std::size_t size() const { return graph->num_vertices(); }
    Rational transition(std::uint32_t x, std::uint32_t y) const;
    // out = in P (P is symmetric)
    void step(const std::vector<double>& in, std::vector<double>& out) const;
};

Chain build_chain(const FlipGraph& g);
// moves defaults to the maximum degree
Chain build_chain(const Graph& g, std::optional<std::size_t> moves = std::nullopt);

// exact row sums and symmetry
bool verify_chain(const Chain& c);

double tvd(const std::vector<double>& mu, const std::vector<double>& nu);

struct MixingOptions {
    double epsilon = 0.25;
    std::size_t exhaustive_cap = 2000;  // all point-mass starts up to this size without symmetry
    std::size_t size_cap = 300000;
    std::size_t max_steps = 1000000;
};

struct MixingResult {
    std::size_t tau = 0;
    double epsilon = 0.25;
    std::vector<double> curve;  // worst-start TVD for t = 0..tau
    std::size_t starts_evaluated = 0;
    bool symmetry_reduced = false;
    bool heuristic_start = false;  // only then is tau a lower bound
};

MixingResult mixing_time(const Chain& c, const MixingOptions& opt = {});
std::string tvd_csv(const MixingResult& r);

struct GapOptions {
    std::size_t dense_cap = 2000;
    std::size_t max_iterations = 3000;
    double tolerance = 1e-10;
};

struct GapResult {
    double gap = 0;      // 1 - lambda_2 of the lazy chain
    double lambda2 = 1;
    std::vector<double> vector;  // unit eigenvector of lambda_2
    bool dense = true;
    std::size_t iterations = 0;
    double residual = 0;
};

GapResult spectral_gap(const Chain& c, const GapOptions& opt = {});

// Cheeger bracket for the walk P' = 2P - I (step along each slot with
// probability 1/moves), whose gap is twice the lazy gap and whose conductance
// is h / moves.
struct CheegerBracket {
    double lazy_gap = 0;
    double walk_gap = 0;
    std::size_t degree = 0;
    double lower_norm = 0;  // walk_gap / 2
    double upper_norm = 0;  // sqrt(2 walk_gap)
    double lower_h = 0;     // degree * lower_norm
    double upper_h = 0;
    bool contains(double h) const;
};

CheegerBracket cheeger_bounds(const Chain& c, double lazy_gap);

enum class CutConstruction { BruteForce, CentralShortestSide, Custom };

struct CutReport {
    std::vector<std::uint32_t> side;  // empty for class-level reports
    BigCount boundary;
    BigCount size_s;
    BigCount size_complement;
    Rational ratio;       // boundary / min(|S|, |S^c|)
    Rational ratio_side;  // boundary / |S|
    CutConstruction construction = CutConstruction::Custom;
    bool degenerate = false;
    std::string notice;
    int threshold = 0;
};

CutReport cut_report(const Graph& g, const std::vector<std::uint32_t>& side);
CutReport brute_force_expansion(const Graph& g);
// S = central-triangle classes whose shortest side is at most floor(n/6)
CutReport shortest_side_cut(const FlipGraph& g);
CutReport shortest_side_cut_class_level(int n);

struct WalkSample {
    std::vector<std::uint64_t> histogram;
    std::uint32_t final_state = 0;
    std::uint64_t trajectory_hash = 0;  // FNV-1a over visited states
    std::uint64_t samples = 0;
    double chi_square = 0;
    double p_value = 1;
};

// records every `thin`-th state after the start
WalkSample sample_walk(const Chain& c, std::uint64_t steps, std::uint64_t seed, std::uint32_t start,
                       std::uint64_t thin = 1);

nlohmann::json to_json(const CutReport& r);
nlohmann::json to_json(const CheegerBracket& b);
nlohmann::json spectral_summary(const Chain& c, const GapResult& gap, const MixingResult* mix,
                                const CheegerBracket& ch, const CutReport* cut);

}  // namespace flipwalk
