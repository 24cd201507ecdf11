#include "flipwalk/spectral.hpp"

#include "flipwalk/decomposition.hpp"
#include "flipwalk/error.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace flipwalk {

Chain build_chain(const FlipGraph& g) {
    Chain c;
    c.graph = &g.graph;
    c.flips = &g;
    c.k = g.k;
    c.n = g.n;
    c.moves = static_cast<std::size_t>(std::max(0, (g.n - 1) * (g.k - 2)));
    if (g.graph.max_degree() > c.moves) throw Error(ErrorKind::StructureMismatch, "flip degree exceeds the move count");
    if (c.moves == 0) c.moves = 1;
    return c;
}

Chain build_chain(const Graph& g, std::optional<std::size_t> moves) {
    Chain c;
    c.graph = &g;
    c.moves = moves ? *moves : g.max_degree();
    if (c.moves < g.max_degree()) throw Error(ErrorKind::InvalidParameter, "move count below the maximum degree");
    if (c.moves == 0) c.moves = 1;
    return c;
}

Rational Chain::transition(std::uint32_t x, std::uint32_t y) const {
    const Rational slot(1, static_cast<unsigned long>(2 * moves));
    if (x == y) return Rational(1) - slot * static_cast<unsigned long>(graph->degree(x));
    return graph->arc_index(x, y) == graph->num_arcs() ? Rational(0) : slot;
}

void Chain::step(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t nv = size();
    const double w = 1.0 / (2.0 * static_cast<double>(moves));
    out.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        double s = 0;
        for (auto u : graph->neighbors(v)) s += in[u];
        out[v] = in[v] * (1.0 - w * static_cast<double>(graph->degree(v))) + w * s;
    }
}

bool verify_chain(const Chain& c) {
    const std::size_t nv = c.size();
    for (std::uint32_t x = 0; x < nv; ++x) {
        Rational row = c.transition(x, x);
        if (sgn(row) < 0) return false;
        for (auto y : c.graph->neighbors(x)) {
            Rational p = c.transition(x, y);
            if (p != c.transition(y, x)) return false;
            row += p;
        }
        if (row != 1) return false;
    }
    return true;
}

double tvd(const std::vector<double>& mu, const std::vector<double>& nu) {
    if (mu.size() != nu.size()) throw Error(ErrorKind::DimensionMismatch, "distributions of different sizes");
    double sm = 0, sn = 0, d = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] < 0 || nu[i] < 0) throw Error(ErrorKind::InvalidDistribution, "negative probability");
        sm += mu[i];
        sn += nu[i];
        d += std::abs(mu[i] - nu[i]);
    }
    if (std::abs(sm - 1) > 1e-12 || std::abs(sn - 1) > 1e-12)
        throw Error(ErrorKind::InvalidDistribution, "distribution does not sum to one");
    return d / 2;
}

namespace {

double tvd_uniform(const std::vector<double>& x) {
    const double u = 1.0 / static_cast<double>(x.size());
    double d = 0;
    for (double v : x) d += std::abs(v - u);
    return d / 2;
}

// Lanczos with full reorthogonalization on the complement of the constant vector
GapResult lanczos_gap(const Chain& c, const GapOptions& opt) {
    const std::size_t nv = c.size();
    const std::size_t iters = std::min<std::size_t>({opt.max_iterations, nv - 1, std::max<std::size_t>(50, 40000000 / nv)});
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto deflate = [&](std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= static_cast<double>(nv);
        for (double& x : v) x -= m;
    };
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < nv; ++i) s += a[i] * b[i];
        return s;
    };
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> q(nv), w;
    for (double& x : q) x = unif(rng);
    deflate(q);
    double nq = std::sqrt(dot(q, q));
    for (double& x : q) x /= nq;
    GapResult r;
    r.dense = false;
    for (std::size_t j = 0; j < iters; ++j) {
        basis.push_back(q);
        c.step(q, w);
        deflate(w);
        double a = dot(w, q);
        alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                double p = dot(w, b);
                for (std::size_t i = 0; i < nv; ++i) w[i] -= p * b[i];
            }
        double bnorm = std::sqrt(dot(w, w));
        const std::size_t dim = alpha.size();
        if (dim % 10 == 0 || bnorm < 1e-14 || j + 1 == iters) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
            for (std::size_t i = 0; i < dim; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            double theta = es.eigenvalues()(dim - 1);
            double res = bnorm * std::abs(es.eigenvectors()(dim - 1, dim - 1));
            r.iterations = dim;
            r.residual = res;
            if (res < opt.tolerance || bnorm < 1e-14) {
                r.lambda2 = theta;
                r.gap = 1 - theta;
                r.vector.assign(nv, 0.0);
                for (std::size_t i = 0; i < dim; ++i) {
                    double s = es.eigenvectors()(i, dim - 1);
                    for (std::size_t v = 0; v < nv; ++v) r.vector[v] += s * basis[i][v];
                }
                double nrm = std::sqrt(dot(r.vector, r.vector));
                for (double& x : r.vector) x /= nrm;
                return r;
            }
        }
        beta.push_back(bnorm);
        for (std::size_t i = 0; i < nv; ++i) q[i] = w[i] / bnorm;
    }
    std::ostringstream msg;
    msg << "Lanczos did not converge, residual " << r.residual;
    throw Error(ErrorKind::NumericFailure, msg.str());
}

}  // namespace

GapResult spectral_gap(const Chain& c, const GapOptions& opt) {
    const std::size_t nv = c.size();
    GapResult r;
    if (nv < 2) {
        r.gap = 1;
        r.lambda2 = 0;
        return r;
    }
    if (nv > opt.dense_cap) return lanczos_gap(c, opt);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nv, nv);
    const double w = 1.0 / (2.0 * static_cast<double>(c.moves));
    for (std::size_t v = 0; v < nv; ++v) {
        P(v, v) = 1.0 - w * static_cast<double>(c.graph->degree(v));
        for (auto u : c.graph->neighbors(v)) P(v, u) = w;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericFailure, "dense eigensolver failed");
    r.lambda2 = es.eigenvalues()(nv - 2);
    r.gap = 1 - r.lambda2;
    r.vector.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) r.vector[v] = es.eigenvectors()(v, nv - 2);
    r.dense = true;
    return r;
}

MixingResult mixing_time(const Chain& c, const MixingOptions& opt) {
    const std::size_t nv = c.size();
    if (nv > opt.size_cap) throw Error(ErrorKind::TooLarge, "chain exceeds the mixing-time cap");
    MixingResult r;
    r.epsilon = opt.epsilon;
    std::vector<std::uint32_t> starts;
    if (c.flips) {
        starts = dihedral_orbit_representatives(*c.flips);
        r.symmetry_reduced = true;
    } else if (nv <= opt.exhaustive_cap) {
        for (std::uint32_t v = 0; v < nv; ++v) starts.push_back(v);
    } else {
        auto g = spectral_gap(c);
        auto mx = std::max_element(g.vector.begin(), g.vector.end()) - g.vector.begin();
        auto mn = std::min_element(g.vector.begin(), g.vector.end()) - g.vector.begin();
        starts.push_back(static_cast<std::uint32_t>(mx));
        if (mn != mx) starts.push_back(static_cast<std::uint32_t>(mn));
        r.heuristic_start = true;
    }
    r.starts_evaluated = starts.size();

    std::vector<std::vector<double>> traj(starts.size());
    std::vector<std::vector<double>> state(starts.size());
    std::vector<double> next;
    std::size_t tau = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::vector<double> x(nv, 0.0);
        x[starts[i]] = 1.0;
        double d = tvd_uniform(x);
        traj[i].push_back(d);
        while (d >= opt.epsilon) {
            if (traj[i].size() > opt.max_steps) throw Error(ErrorKind::NumericFailure, "walk did not mix within max_steps");
            c.step(x, next);
            x.swap(next);
            d = tvd_uniform(x);
            traj[i].push_back(d);
        }
        tau = std::max(tau, traj[i].size() - 1);
        state[i] = std::move(x);
    }
    r.tau = tau;
    r.curve.assign(tau + 1, 0.0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        std::vector<double>& x = state[i];
        while (traj[i].size() <= tau) {
            c.step(x, next);
            x.swap(next);
            traj[i].push_back(tvd_uniform(x));
        }
        for (std::size_t t = 0; t <= tau; ++t) r.curve[t] = std::max(r.curve[t], traj[i][t]);
    }
    return r;
}

std::string tvd_csv(const MixingResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << "step,tvd\n";
    for (std::size_t t = 0; t < r.curve.size(); ++t) os << t << ',' << r.curve[t] << '\n';
    return os.str();
}

bool CheegerBracket::contains(double h) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(h));
    return lower_h - slack <= h && h <= upper_h + slack;
}

CheegerBracket cheeger_bounds(const Chain& c, double lazy_gap) {
    CheegerBracket b;
    b.lazy_gap = std::max(0.0, lazy_gap);
    b.walk_gap = 2 * b.lazy_gap;
    b.degree = c.moves;
    b.lower_norm = b.walk_gap / 2;
    b.upper_norm = std::sqrt(2 * b.walk_gap);
    b.lower_h = static_cast<double>(b.degree) * b.lower_norm;
    b.upper_h = static_cast<double>(b.degree) * b.upper_norm;
    return b;
}

namespace {

Rational ratio_of(const BigCount& a, const BigCount& b) {
    Rational r(a, b);
    r.canonicalize();
    return r;
}

void fill_ratios(CutReport& r) {
    const BigCount& small = r.size_s < r.size_complement ? r.size_s : r.size_complement;
    if (sgn(small) == 0) {
        r.degenerate = true;
        if (r.notice.empty()) r.notice = "one side of the cut is empty";
        r.ratio = 0;
        r.ratio_side = 0;
        return;
    }
    r.ratio = ratio_of(r.boundary, small);
    r.ratio_side = ratio_of(r.boundary, r.size_s);
}

}  // namespace

CutReport cut_report(const Graph& g, const std::vector<std::uint32_t>& side) {
    std::vector<char> in(g.num_vertices(), 0);
    for (auto v : side) {
        if (v >= g.num_vertices()) throw Error(ErrorKind::InvalidInput, "cut vertex out of range");
        in[v] = 1;
    }
    CutReport r;
    r.side = side;
    std::sort(r.side.begin(), r.side.end());
    r.side.erase(std::unique(r.side.begin(), r.side.end()), r.side.end());
    unsigned long b = 0;
    for (auto v : r.side)
        for (auto w : g.neighbors(v))
            if (!in[w]) ++b;
    r.boundary = b;
    r.size_s = static_cast<unsigned long>(r.side.size());
    r.size_complement = static_cast<unsigned long>(g.num_vertices() - r.side.size());
    fill_ratios(r);
    return r;
}

CutReport brute_force_expansion(const Graph& g) {
    const std::size_t nv = g.num_vertices();
    if (nv > 24) throw Error(ErrorKind::TooLarge, "brute-force expansion is limited to 24 vertices");
    if (nv < 2) throw Error(ErrorKind::InvalidInput, "expansion needs at least two vertices");
    std::vector<std::uint32_t> nbmask(nv, 0);
    for (std::size_t v = 0; v < nv; ++v)
        for (auto w : g.neighbors(v)) nbmask[v] |= 1u << w;
    // Gray code walk over all subsets
    std::uint32_t mask = 0;
    long boundary = 0, size = 0;
    long best_b = -1, best_s = 1;
    std::uint32_t best_mask = 0;
    const std::uint64_t total = std::uint64_t{1} << nv;
    for (std::uint64_t i = 1; i < total; ++i) {
        const int v = __builtin_ctzll(i);
        const std::uint32_t bit = 1u << v;
        const long inside = __builtin_popcount(nbmask[v] & mask);
        const long deg = __builtin_popcount(nbmask[v]);
        if (mask & bit) {
            mask &= ~bit;
            --size;
            boundary += 2 * inside - deg;
        } else {
            mask |= bit;
            ++size;
            boundary += deg - 2 * inside;
        }
        if (2 * size > static_cast<long>(nv)) continue;
        if (best_b < 0 || boundary * best_s < best_b * size ||
            (boundary * best_s == best_b * size && mask < best_mask)) {
            best_b = boundary;
            best_s = size;
            best_mask = mask;
        }
    }
    std::vector<std::uint32_t> side;
    for (std::uint32_t v = 0; v < nv; ++v)
        if (best_mask >> v & 1u) side.push_back(v);
    CutReport r = cut_report(g, side);
    r.construction = CutConstruction::BruteForce;
    return r;
}

namespace {

int shortest_arc(int m, const std::vector<int>& poly) {
    int best = m;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        int span = (poly[(i + 1) % poly.size()] - poly[i] + m) % m;
        best = std::min(best, span);
    }
    return best;
}

void degenerate_notice(CutReport& r, int n) {
    if (n < 7) {
        r.degenerate = true;
        r.notice = "n < 7: the shortest-side cut is degenerate at this size";
    }
}

}  // namespace

CutReport shortest_side_cut(const FlipGraph& g) {
    if (g.k != 3) throw Error(ErrorKind::InvalidParameter, "shortest-side cut is defined for triangulations");
    const int threshold = g.n / 6;
    std::vector<std::uint32_t> side;
    for (std::uint32_t v = 0; v < g.size(); ++v)
        if (shortest_arc(g.m, central_polygon(g.vertices[v])) <= threshold) side.push_back(v);
    CutReport r;
    degenerate_notice(r, g.n);
    CutReport c = cut_report(g.graph, side);
    if (r.degenerate) {
        c.degenerate = true;
        c.notice = r.notice;
    }
    c.construction = CutConstruction::CentralShortestSide;
    c.threshold = threshold;
    return c;
}

CutReport shortest_side_cut_class_level(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidParameter, "n must be positive");
    const auto cl = central_class_structure(3, n);
    const int threshold = n / 6;
    std::vector<char> in(cl.polygons.size(), 0);
    CutReport r;
    r.construction = CutConstruction::CentralShortestSide;
    r.threshold = threshold;
    degenerate_notice(r, n);
    r.size_s = 0;
    r.size_complement = 0;
    for (std::size_t i = 0; i < cl.polygons.size(); ++i) {
        in[i] = shortest_arc(cl.m, cl.polygons[i]) <= threshold;
        (in[i] ? r.size_s : r.size_complement) += cl.sizes[i];
    }
    r.boundary = 0;
    for (const auto& [ab, cnt] : cl.edges)
        if (in[ab.first] && !in[ab.second]) r.boundary += cnt;
    fill_ratios(r);
    return r;
}

WalkSample sample_walk(const Chain& c, std::uint64_t steps, std::uint64_t seed, std::uint32_t start, std::uint64_t thin) {
    const std::size_t nv = c.size();
    if (start >= nv) throw Error(ErrorKind::InvalidInput, "start state out of range");
    if (thin == 0) throw Error(ErrorKind::InvalidParameter, "thinning must be positive");
    WalkSample w;
    w.histogram.assign(nv, 0);
    std::mt19937_64 rng(seed);
    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&](std::uint32_t s) {
        for (int b = 0; b < 4; ++b) {
            hash ^= (s >> (8 * b)) & 0xffu;
            hash *= 1099511628211ull;
        }
    };
    std::uint32_t x = start;
    mix(x);
    ++w.histogram[x];
    ++w.samples;
    for (std::uint64_t t = 1; t <= steps; ++t) {
        const std::uint64_t u = rng();
        if (u & 1u) {
            const std::uint64_t slot =
                static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * c.moves) >> 64);
            auto nb = c.graph->neighbors(x);
            if (slot < nb.size()) x = nb[slot];
        }
        mix(x);
        if (t % thin == 0) {
            ++w.histogram[x];
            ++w.samples;
        }
    }
    w.final_state = x;
    w.trajectory_hash = hash;
    const double expected = static_cast<double>(w.samples) / static_cast<double>(nv);
    double chi = 0;
    for (auto h : w.histogram) {
        double d = static_cast<double>(h) - expected;
        chi += d * d / expected;
    }
    w.chi_square = chi;
    w.p_value = nv > 1 ? boost::math::gamma_q(static_cast<double>(nv - 1) / 2, chi / 2) : 1.0;
    return w;
}

namespace {

nlohmann::json exact(const Rational& q) { return {{"exact", q.get_str()}, {"value", q.get_d()}}; }

}  // namespace

nlohmann::json to_json(const CutReport& r) {
    nlohmann::json j;
    j["boundary"] = r.boundary.get_str();
    j["sizes"] = {r.size_s.get_str(), r.size_complement.get_str()};
    j["ratio"] = exact(r.ratio);
    j["ratio_side"] = exact(r.ratio_side);
    const char* cons[] = {"brute-force", "central-shortest-side", "custom"};
    j["construction"] = cons[static_cast<int>(r.construction)];
    j["degenerate"] = r.degenerate;
    if (!r.notice.empty()) j["notice"] = r.notice;
    j["threshold"] = r.threshold;
    if (!r.side.empty()) j["side"] = r.side;
    return j;
}

nlohmann::json to_json(const CheegerBracket& b) {
    return {{"lazy_gap", b.lazy_gap}, {"walk_gap", b.walk_gap}, {"degree", b.degree},
            {"normalized", {b.lower_norm, b.upper_norm}}, {"h", {b.lower_h, b.upper_h}}};
}

nlohmann::json spectral_summary(const Chain& c, const GapResult& gap, const MixingResult* mix,
                                const CheegerBracket& ch, const CutReport* cut) {
    nlohmann::json j;
    j["n"] = c.n;
    j["k"] = c.k;
    j["vertices"] = c.size();
    j["gap"] = gap.gap;
    j["gap_solver"] = gap.dense ? "dense" : "lanczos";
    if (mix) {
        j["mixing_time"] = mix->tau;
        j["epsilon"] = mix->epsilon;
        j["heuristic_start"] = mix->heuristic_start;
        j["starts_evaluated"] = mix->starts_evaluated;
    } else {
        j["mixing_time"] = nullptr;
    }
    j["cheeger"] = {ch.lower_h, ch.upper_h};
    j["cut"] = cut ? to_json(*cut) : nlohmann::json(nullptr);
    return j;
}

}  // namespace flipwalk
