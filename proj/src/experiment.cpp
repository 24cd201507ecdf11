#include "flipwalk/experiment.hpp"

#include "flipwalk/combinatorics.hpp"
#include "flipwalk/decomposition.hpp"
#include "flipwalk/flownet.hpp"
#include "flipwalk/kangulation.hpp"
#include "flipwalk/lattice.hpp"
#include "flipwalk/spectral.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

namespace flipwalk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRowSchema = "flipwalk.summary/1";
constexpr const char* kRunSchema = "flipwalk.run/1";
// recursive flows are built on K_n up to this many vertices (n <= 9)
constexpr std::size_t kFlowVertexCap = 5000;
constexpr std::size_t kBruteForceCap = 24;

const std::vector<std::pair<std::string, Command>> kCommands = {
    {"enumerate", Command::Enumerate}, {"analyze", Command::Analyze}, {"flow", Command::Flow},
    {"cut", Command::Cut},             {"lattice", Command::Lattice}, {"sample", Command::Sample},
    {"report", Command::Report},
};

const std::set<std::string> kKeys = {"command", "k",          "n",     "n_range", "seed",         "steps",
                                     "thin",    "start",      "epsilon", "cap",   "exact_cap",    "block",
                                     "arithmetic", "full_edges", "out", "format",  "normalization", "inputs"};

Error usage(const std::string& what) { return Error(ErrorKind::Usage, what); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string canonical_key(std::string key) {
    for (char& c : key)
        if (c == '-') c = '_';
    return key;
}

template <class T>
T parse_integer(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || v.empty())
        throw usage("field '" + key + "': expected an integer, got '" + v + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size())
        throw usage("field '" + key + "': expected a number, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw usage("field '" + key + "': expected true or false, got '" + v + "'");
}

std::pair<int, int> parse_range(const std::string& v) {
    const auto dots = v.find("..");
    if (dots == std::string::npos) throw usage("field 'n_range': expected A..B, got '" + v + "'");
    return {parse_integer<int>("n_range", v.substr(0, dots)), parse_integer<int>("n_range", v.substr(dots + 2))};
}

std::string hex64(std::uint64_t x) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

json exact_json(const Rational& q) { return {{"exact", q.get_str()}, {"value", q.get_d()}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string tag(const ExperimentConfig& c, int n) {
    if (c.command == Command::Lattice) return "n" + std::to_string(n);
    return "k" + std::to_string(c.k) + "_n" + std::to_string(n);
}

// Carries a structured witness alongside the error text.
struct Violation : Error {
    Violation(const std::string& what, json w) : Error(ErrorKind::LemmaViolation, what), witness(std::move(w)) {}
    json witness;
};

// flip graph, memoized on disk under FLIPWALK_CACHE_DIR
std::shared_ptr<const FlipGraph> load_graph(int k, int n, std::uint64_t cap) {
    const BigCount count = fuss_catalan(k, n);
    if (count > BigCount(static_cast<unsigned long>(cap)))
        throw Error(ErrorKind::EnumerationTooLarge, "fuss_catalan(" + std::to_string(k) + "," + std::to_string(n) +
                                                        ") = " + count.get_str() + " exceeds cap " +
                                                        std::to_string(cap));
    const char* dir = std::getenv("FLIPWALK_CACHE_DIR");
    if (!dir || !*dir) return std::make_shared<FlipGraph>(build_flip_graph(k, n, cap));
    const fs::path path = fs::path(dir) / ("flipgraph_k" + std::to_string(k) + "_n" + std::to_string(n) + ".json");
    if (fs::exists(path)) {
        try {
            std::ifstream in(path);
            auto g = std::make_shared<FlipGraph>(flip_graph_from_json(json::parse(in)));
            if (g->k == k && g->n == n && BigCount(static_cast<unsigned long>(g->size())) == count) return g;
        } catch (const std::exception&) {
            // stale or corrupt entry: rebuild below
        }
    }
    auto g = std::make_shared<FlipGraph>(build_flip_graph(k, n, cap));
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << to_json(*g).dump();
    }
    fs::rename(tmp, path, ec);
    return g;
}

json base_row(const ExperimentConfig& c, int n) {
    json row;
    row["schema"] = kRowSchema;
    row["command"] = command_name(c.command);
    if (c.command != Command::Lattice) row["k"] = c.k;
    row["n"] = n;
    return row;
}

std::string edge_csv(const Graph& g) {
    std::ostringstream os;
    os << "u,v\n";
    for (std::size_t u = 0; u < g.num_vertices(); ++u)
        for (auto v : g.neighbors(u))
            if (u < v) os << u << ',' << v << '\n';
    return os.str();
}

using Artifacts = std::vector<std::pair<std::string, std::string>>;

class Runner {
public:
    explicit Runner(const ExperimentConfig& c) : c_(c) {}

    json row(int n, Artifacts& files) {
        switch (c_.command) {
        case Command::Enumerate: return enumerate_row(n, files);
        case Command::Analyze: return analyze_row(n, files);
        case Command::Flow: return flow_row(n, files);
        case Command::Cut: return cut_row(n, files);
        case Command::Lattice: return lattice_row(n, files);
        case Command::Sample: return sample_row(n, files);
        case Command::Report: break;
        }
        throw usage("report takes no n range");
    }

private:
    void export_graph(const FlipGraph& g, const std::string& stem, Artifacts& files) const {
        if (c_.format == "dot") files.emplace_back(stem + ".dot", to_dot(g));
        else if (c_.format == "csv") files.emplace_back(stem + ".csv", edge_csv(g.graph));
        else files.emplace_back(stem + ".json", to_json(g).dump() + "\n");
    }

    json enumerate_row(int n, Artifacts& files) {
        auto g = load_graph(c_.k, n, c_.cap);
        json r = base_row(c_, n);
        const BigCount expected = fuss_catalan(c_.k, n);
        r["vertices"] = g->size();
        r["edges"] = g->graph.num_edges();
        r["degree"] = g->graph.max_degree();
        r["regular"] = g->graph.is_regular();
        r["expected"] = expected.get_str();
        const bool match = BigCount(static_cast<unsigned long>(g->size())) == expected;
        r["count_matches"] = match;
        if (!match)
            throw Violation("vertex count differs from fuss_catalan",
                            {{"k", c_.k}, {"n", n}, {"count", g->size()}, {"expected", expected.get_str()}});
        if (g->size() <= c_.exact_cap) r["diameter"] = flip_graph_diameter(*g);
        export_graph(*g, "graph_" + tag(c_, n), files);
        return r;
    }

    json lemma_checks(const FlipGraph& g) {
        json out;
        ClassPartition p = c_.k == 3 ? oriented_partition(g) : central_partition(g);
        out["partition"] = c_.k == 3 ? "oriented" : "central";
        out["classes"] = p.classes.size();
        verify_cartesian_structure(p);
        out["cartesian"] = true;
        auto ms = boundary_matchings(p);
        verify_edge_classification(p, ms);
        out["edge_classification"] = true;
        if (c_.k == 3) {
            for (const auto& cls : p.classes)
                if (BigCount(static_cast<unsigned long>(cls.size())) != oriented_class_size(g.n, cls.apex))
                    throw Violation("class size differs from the Catalan product",
                                    {{"n", g.n}, {"apex", cls.apex}, {"size", cls.size()},
                                     {"expected", oriented_class_size(g.n, cls.apex).get_str()}});
            for (const auto& m : ms) {
                const int a = p.classes[m.class_a].apex, b = p.classes[m.class_b].apex;
                if (BigCount(static_cast<unsigned long>(m.edges.size())) != oriented_matching_size(g.n, a, b))
                    throw Violation("matching size differs from the Catalan product",
                                    {{"n", g.n}, {"apex_a", a}, {"apex_b", b}, {"size", m.edges.size()},
                                     {"expected", oriented_matching_size(g.n, a, b).get_str()}});
            }
            out["closed_forms"] = true;
        }
        if (c_.k == 3 && g.n >= 2) {
            auto mi = verify_matching_inequality(p);
            out["matching_inequality"] = {{"pairs", mi.pairs_checked}, {"max_slack", exact_json(mi.max_slack)}};
            if (mi.max_slack > 1)
                throw Violation("matching inequality fails",
                                {{"n", g.n}, {"apex_a", mi.worst_a}, {"apex_b", mi.worst_b},
                                 {"slack", mi.max_slack.get_str()}});
        }
        return out;
    }

    RecursiveFlowBuilder& builder() {
        if (!builder_) builder_ = std::make_unique<RecursiveFlowBuilder>(c_.n_hi);
        return *builder_;
    }

    json analyze_row(int n, Artifacts& files) {
        auto g = load_graph(c_.k, n, c_.cap);
        Chain ch = build_chain(*g);
        GapResult gap = spectral_gap(ch);
        CheegerBracket cb = cheeger_bounds(ch, gap.gap);
        std::optional<MixingResult> mix;
        if (g->size() <= c_.exact_cap) {
            MixingOptions mo;
            mo.epsilon = c_.epsilon;
            mo.size_cap = c_.exact_cap;
            mix = mixing_time(ch, mo);
        }
        std::optional<CutReport> cut;
        if (c_.k == 3) cut = shortest_side_cut(*g);

        json r = spectral_summary(ch, gap, mix ? &*mix : nullptr, cb, cut ? &*cut : nullptr);
        r.update(base_row(c_, n));
        r["degree"] = g->graph.max_degree();
        r["edges"] = g->graph.num_edges();
        r["cheeger_detail"] = to_json(cb);
        r["cheeger_lo"] = cb.lower_h;
        r["cheeger_hi"] = cb.upper_h;
        r["tau"] = mix ? json(mix->tau) : json(nullptr);
        r["cut_ratio"] = cut && !cut->degenerate ? json(to_double(cut->ratio)) : json(nullptr);
        r["flow_rho"] = nullptr;
        if (c_.k == 3 && g->size() <= kFlowVertexCap) {
            auto f = uniform_flow_recursive(builder(), n, false);
            const CongestionReport rep = c_.normalization == "chain" ? chain_congestion(f.aggregate) : f.report;
            r["flow_rho"] = to_double(rep.rho);
            r["flow"] = to_json(rep);
        }
        if (g->size() <= kBruteForceCap) {
            CutReport h = brute_force_expansion(g->graph);
            r["expansion"] = exact_json(h.ratio);
            r["expansion_in_bracket"] = cb.contains(to_double(h.ratio));
        }
        r["lemmas"] = lemma_checks(*g);
        if (mix && c_.format == "csv") files.emplace_back("tvd_" + tag(c_, n) + ".csv", tvd_csv(*mix));
        files.emplace_back("analyze_" + tag(c_, n) + ".json", dump(r));
        return r;
    }

    json flow_row(int n, Artifacts& files) {
        auto& b = builder();
        auto f = uniform_flow_recursive(b, n, c_.exact);
        const CongestionReport rep = c_.normalization == "chain" ? chain_congestion(f.aggregate) : f.report;
        json r = base_row(c_, n);
        const FlipGraph& g = b.graph(n);
        r["vertices"] = g.size();
        r["degree"] = g.graph.max_degree();
        r["arithmetic"] = c_.exact ? "exact" : "float";
        r["congestion"] = to_json(rep);
        r["flow_rho"] = to_double(rep.rho);
        r["certified"] = f.certified;
        r["commodities_checked"] = f.commodities_checked;
        r["aggregate_consistent"] = f.aggregate_consistent;
        r["max_matching_arc_flow"] = exact_json(f.max_matching_arc_flow);
        r["matching_flow_within_cn"] = f.matching_flow_within_cn;
        r["expansion_lower_bound"] = exact_json(expansion_lower_bound(f.report));
        r["pairing"] = to_json(hierarchical_pairing_closed_form(n));
        if (c_.exact && !f.certified)
            throw Violation("uniform flow fails a demand", {{"n", n}, {"commodities_checked", f.commodities_checked}});
        if (!f.matching_flow_within_cn)
            throw Violation("matching arc carries more than C_n",
                            {{"n", n}, {"max_matching_arc_flow", f.max_matching_arc_flow.get_str()},
                             {"catalan", catalan(n).get_str()}});
        if (n >= 3) {
            auto setup = oriented_combiner_setup(b, n);
            auto proj = projection_flow_direct(setup->input);
            auto cr = projection_restriction_combine(setup->input, proj);
            r["combiner"] = {{"rho", exact_json(cr.report.rho)}, {"bound", exact_json(cr.bound)},
                             {"rho_bar", exact_json(cr.rho_bar)}, {"gamma", exact_json(cr.gamma)},
                             {"rho_max", exact_json(cr.rho_max)}, {"certified", cr.certified},
                             {"within_bound", cr.within_bound}};
            if (!cr.certified || !cr.within_bound)
                throw Violation("combined flow exceeds its bound",
                                {{"n", n}, {"rho", cr.report.rho.get_str()}, {"bound", cr.bound.get_str()}});
        }
        if (c_.full_edges) {
            std::ostringstream os;
            os << "u,v,flow\n";
            for (std::size_t a = 0; a < f.aggregate.size(); ++a)
                os << g.graph.arc_tail(a) << ',' << g.graph.arc_head(a) << ',' << f.aggregate[a].get_str() << '\n';
            files.emplace_back("flow_arcs_" + tag(c_, n) + ".csv", os.str());
        }
        files.emplace_back("flow_" + tag(c_, n) + ".json", dump(r));
        return r;
    }

    json cut_row(int n, Artifacts& files) {
        json r = base_row(c_, n);
        CutReport cl = shortest_side_cut_class_level(n);
        r["cut"] = to_json(cl);
        r["cut_ratio"] = cl.degenerate ? json(nullptr) : json(to_double(cl.ratio));
        r["vertices"] = catalan(n).get_str();
        if (fuss_catalan(3, n) <= BigCount(static_cast<unsigned long>(kBruteForceCap))) {
            auto g = load_graph(3, n, c_.cap);
            r["expansion"] = exact_json(brute_force_expansion(g->graph).ratio);
        }
        files.emplace_back("cut_" + tag(c_, n) + ".json", dump(r));
        return r;
    }

    json lattice_row(int n, Artifacts& files) {
        LatticeFlipGraph g = enumerate_lattice(n);
        json r = base_row(c_, n);
        r["vertices"] = g.size();
        r["edges"] = g.graph.num_edges();
        r["degree"] = g.graph.max_degree();
        const auto direct = enumerate_lattice_direct(n);
        const bool agree = direct == g.vertices;
        r["oracles_agree"] = agree;
        if (!agree)
            throw Violation("flip closure and direct enumeration differ",
                            {{"n", n}, {"flip_closure", g.size()}, {"direct", direct.size()}});
        if (n % c_.block == 0 && n > c_.block) {
            ProductSubgraph ps = product_subgraph(n, c_.block);
            json p = {{"block", c_.block},
                      {"vertices", ps.h.size()},
                      {"product_verified", ps.product_verified}};
            auto cube = hypercube_labelling(ps.h.graph);
            p["hypercube"] = cube.has_value();
            if (!ps.product_verified)
                throw Violation("constrained subgraph is not the block product", {{"n", n}, {"block", c_.block}});
            if (ps.h.size() <= kBruteForceCap && ps.block_graph.size() <= kBruteForceCap) {
                const Rational h = brute_force_expansion(ps.h.graph).ratio;
                const Rational hb = brute_force_expansion(ps.block_graph.graph).ratio;
                p["expansion"] = exact_json(h);
                p["block_expansion"] = exact_json(hb);
                p["half_block_bound"] = h * 2 >= hb;
                if (h * 2 < hb)
                    throw Violation("product expansion below half the block expansion",
                                    {{"n", n}, {"expansion", h.get_str()}, {"block_expansion", hb.get_str()}});
            }
            r["product"] = p;
        }
        if (c_.format == "dot") files.emplace_back("lattice_" + tag(c_, n) + ".dot", to_dot(g));
        else if (c_.format == "csv") files.emplace_back("lattice_" + tag(c_, n) + ".csv", edge_csv(g.graph));
        else files.emplace_back("lattice_" + tag(c_, n) + ".json", to_json(g).dump() + "\n");
        return r;
    }

    json sample_row(int n, Artifacts& files) {
        auto g = load_graph(c_.k, n, c_.cap);
        if (c_.start >= g->size())
            throw usage("field 'start': " + std::to_string(c_.start) + " is not a vertex of a graph with " +
                        std::to_string(g->size()) + " vertices");
        Chain ch = build_chain(*g);
        WalkSample s = sample_walk(ch, c_.steps, *c_.seed, c_.start, c_.thin);
        json r = base_row(c_, n);
        r["vertices"] = g->size();
        r["degree"] = g->graph.max_degree();
        r["seed"] = *c_.seed;
        r["steps"] = c_.steps;
        r["thin"] = c_.thin;
        r["start"] = c_.start;
        r["samples"] = s.samples;
        r["final_state"] = s.final_state;
        r["trajectory_hash"] = hex64(s.trajectory_hash);
        r["chi_square"] = s.chi_square;
        r["p_value"] = s.p_value;
        r["histogram"] = s.histogram;
        if (c_.format == "csv") {
            std::ostringstream os;
            os << "state,count\n";
            for (std::size_t v = 0; v < s.histogram.size(); ++v) os << v << ',' << s.histogram[v] << '\n';
            files.emplace_back("sample_" + tag(c_, n) + ".csv", os.str());
        }
        files.emplace_back("sample_" + tag(c_, n) + ".json", dump(r));
        return r;
    }

    const ExperimentConfig& c_;
    std::unique_ptr<RecursiveFlowBuilder> builder_;
};

json config_echo(const ExperimentConfig& c) {
    json j;
    j["command"] = command_name(c.command);
    j["k"] = c.k;
    j["n_range"] = {c.n_lo, c.n_hi};
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["steps"] = c.steps;
    j["thin"] = c.thin;
    j["start"] = c.start;
    j["epsilon"] = c.epsilon;
    j["cap"] = c.cap;
    j["exact_cap"] = c.exact_cap;
    j["block"] = c.block;
    j["arithmetic"] = c.exact ? "exact" : "float";
    j["full_edges"] = c.full_edges;
    j["format"] = c.format;
    j["normalization"] = c.normalization;
    j["inputs"] = c.inputs.size();
    return j;
}

std::vector<json> collect_rows(const std::vector<std::string>& inputs) {
    std::vector<json> rows;
    for (const auto& path : inputs) {
        std::ifstream in(path);
        if (!in) throw usage("cannot read report input '" + path + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw usage("report input '" + path + "': " + e.what());
        }
        if (j.is_object() && j.contains("results")) j = j["results"];
        if (j.is_array())
            for (auto& x : j) rows.push_back(x);
        else
            rows.push_back(j);
    }
    return rows;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidParameter, "cannot write " + path.string());
    out << text;
}

std::string cell(const json& row, const char* key) {
    if (!row.contains(key) || row[key].is_null()) return "";
    const json& v = row[key];
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v.get<double>());
        return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::string command_name(Command c) {
    for (const auto& [name, cmd] : kCommands)
        if (cmd == c) return name;
    return "unknown";
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::InvalidParameter:
    case ErrorKind::InvalidInput:
    case ErrorKind::SchemaMismatch: return 2;
    case ErrorKind::LemmaViolation:
    case ErrorKind::StructureMismatch: return 3;
    case ErrorKind::EnumerationTooLarge:
    case ErrorKind::TooLarge:
    case ErrorKind::RangeExceeded: return 4;
    default: return 1;
    }
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> out;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::parse_error& e) {
            throw usage(std::string("config: ") + e.what());
        }
        for (auto& [key, v] : j.items()) {
            const std::string k = canonical_key(key);
            if (v.is_string()) out[k] = v.get<std::string>();
            else if (v.is_boolean()) out[k] = v.get<bool>() ? "true" : "false";
            else if (v.is_number_integer() || v.is_number_unsigned()) out[k] = v.dump();
            else if (v.is_number_float()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
                out[k] = buf;
            } else if (k == "n_range" && v.is_array() && v.size() == 2 && v[0].is_number_integer() &&
                       v[1].is_number_integer())
                out[k] = v[0].dump() + ".." + v[1].dump();
            else if (k == "inputs" && v.is_array()) {
                std::string joined;
                for (auto& x : v) {
                    if (!x.is_string()) throw usage("config field 'inputs': expected strings");
                    joined += (joined.empty() ? "" : ",") + x.get<std::string>();
                }
                out[k] = joined;
            } else
                throw usage("config field '" + key + "': unsupported value " + v.dump());
        }
        return out;
    }
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw usage("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = canonical_key(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw usage("config line " + std::to_string(lineno) + ": missing key");
        if (!kKeys.count(key)) throw usage("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (out.count(key)) throw usage("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = value;
    }
    return out;
}

void apply_settings(ExperimentConfig& c, const std::map<std::string, std::string>& settings) {
    for (const auto& [key, v] : settings) {
        if (!kKeys.count(key)) throw usage("unknown field '" + key + "'");
        if (key == "command") {
            bool found = false;
            for (const auto& [name, cmd] : kCommands)
                if (name == v) {
                    c.command = cmd;
                    found = true;
                }
            if (!found) throw usage("field 'command': unknown command '" + v + "'");
        } else if (key == "k") c.k = parse_integer<int>(key, v);
        else if (key == "n") c.n_lo = c.n_hi = parse_integer<int>(key, v);
        else if (key == "seed") c.seed = parse_integer<std::uint64_t>(key, v);
        else if (key == "steps") c.steps = parse_integer<std::uint64_t>(key, v);
        else if (key == "thin") c.thin = parse_integer<std::uint64_t>(key, v);
        else if (key == "start") c.start = parse_integer<std::uint32_t>(key, v);
        else if (key == "epsilon") c.epsilon = parse_real(key, v);
        else if (key == "cap") c.cap = parse_integer<std::uint64_t>(key, v);
        else if (key == "exact_cap") c.exact_cap = parse_integer<std::uint64_t>(key, v);
        else if (key == "block") c.block = parse_integer<int>(key, v);
        else if (key == "full_edges") c.full_edges = parse_bool(key, v);
        else if (key == "out") c.out = v;
        else if (key == "format") c.format = v;
        else if (key == "normalization") c.normalization = v;
        else if (key == "arithmetic") {
            if (v != "exact" && v != "float") throw usage("field 'arithmetic': expected exact or float, got '" + v + "'");
            c.exact = v == "exact";
        } else if (key == "inputs") {
            c.inputs.clear();
            std::istringstream in(v);
            std::string item;
            while (std::getline(in, item, ','))
                if (!trim(item).empty()) c.inputs.push_back(trim(item));
        }
    }
    // n_range after n so a range always wins over a single n
    if (auto it = settings.find("n_range"); it != settings.end()) std::tie(c.n_lo, c.n_hi) = parse_range(it->second);
}

void validate(const ExperimentConfig& c) {
    const Command cmd = c.command;
    if (cmd != Command::Report) {
        if (c.n_lo > c.n_hi)
            throw usage("field 'n_range': empty range " + std::to_string(c.n_lo) + ".." + std::to_string(c.n_hi));
        if (c.n_lo < 1) throw usage("field 'n_range': n must be at least 1");
    }
    if (cmd != Command::Lattice && cmd != Command::Report && c.k < 3) throw usage("field 'k': must be at least 3");
    if ((cmd == Command::Flow || cmd == Command::Cut) && c.k != 3)
        throw usage("field 'k': " + command_name(cmd) + " works on triangulations (k = 3)");
    if (c.cap == 0) throw usage("field 'cap': must be positive");
    if (c.exact_cap == 0) throw usage("field 'exact_cap': must be positive");
    if (!(c.epsilon > 0 && c.epsilon < 1)) throw usage("field 'epsilon': must lie in (0, 1)");
    if (c.block < 1) throw usage("field 'block': must be positive");
    if (c.thin == 0) throw usage("field 'thin': must be positive");
    if (c.normalization != "uniform" && c.normalization != "chain")
        throw usage("field 'normalization': expected uniform or chain, got '" + c.normalization + "'");
    static const std::set<std::string> formats = {"json", "csv", "dot", "md"};
    if (!formats.count(c.format)) throw usage("field 'format': unknown format '" + c.format + "'");
    if (c.format == "dot" && cmd != Command::Enumerate && cmd != Command::Lattice)
        throw usage("field 'format': dot export applies to enumerate and lattice");
    if (c.format == "md" && cmd != Command::Report) throw usage("field 'format': md applies to report");
    if (cmd == Command::Sample) {
        if (!c.seed) throw usage("field 'seed': sampling needs a seed");
        if (c.steps == 0) throw usage("field 'steps': must be positive");
    }
    if (cmd == Command::Report && c.inputs.empty()) throw usage("report needs at least one input summary");
    if (c.out.empty()) throw usage("field 'out': empty path");
}

std::string report_table(const std::vector<json>& rows, const std::string& format) {
    static const std::vector<std::pair<std::string, const char*>> cols = {
        {"n", "n"},         {"|V|", "vertices"},       {"degree", "degree"},         {"gap", "gap"},
        {"tau(1/4)", "tau"}, {"cheeger_lo", "cheeger_lo"}, {"cheeger_hi", "cheeger_hi"}, {"flow_rho", "flow_rho"},
        {"cut_ratio", "cut_ratio"}};
    if (format != "csv" && format != "md") throw usage("report format must be csv or md");
    for (const auto& r : rows) {
        if (!r.is_object() || r.value("schema", "") != kRowSchema)
            throw Error(ErrorKind::SchemaMismatch, "row is not a per-n summary");
        const json& first = rows.front();
        if (r.value("command", "") != first.value("command", ""))
            throw Error(ErrorKind::SchemaMismatch, "rows come from different commands");
        if (r.contains("k") != first.contains("k") || (r.contains("k") && r["k"] != first["k"]))
            throw Error(ErrorKind::SchemaMismatch, "rows have different k");
    }
    std::ostringstream os;
    const bool md = format == "md";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (md) os << (i ? " | " : "| ");
            else if (i) os << ',';
            os << cells[i];
        }
        os << (md ? " |\n" : "\n");
    };
    std::vector<std::string> head;
    for (const auto& [title, key] : cols) {
        std::string t = title;
        if (md && t == "|V|") t = "\\|V\\|";
        head.push_back(t);
    }
    line(head);
    if (md) line(std::vector<std::string>(cols.size(), "---"));
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (const auto& [title, key] : cols) cells.push_back(cell(r, key));
        line(cells);
    }
    return os.str();
}

RunOutcome run(const ExperimentConfig& c) {
    validate(c);
    RunOutcome out;
    json summary;
    summary["schema"] = kRunSchema;
    summary["config"] = config_echo(c);
    json results = json::array();
    Artifacts files;
    try {
        if (c.command == Command::Report) {
            auto rows = collect_rows(c.inputs);
            const std::string fmt = c.format == "md" ? "md" : "csv";
            const std::string table = report_table(rows, fmt);
            files.emplace_back("report." + fmt, table);
            summary["rows"] = rows.size();
            out.message = table;
        } else {
            Runner runner(c);
            for (int n = c.n_lo; n <= c.n_hi; ++n) results.push_back(runner.row(n, files));
        }
    } catch (const Violation& e) {
        out.exit_code = 3;
        out.message = e.what();
        summary["violation"] = {{"message", e.what()}, {"witness", e.witness}};
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e.kind());
        out.message = e.what();
        summary["error"] = {{"kind", error_kind_name(e.kind())}, {"message", e.what()}};
    }
    summary["results"] = results;
    summary["exit_code"] = out.exit_code;

    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::InvalidParameter, "cannot create output directory " + c.out);
    for (const auto& [name, text] : files) {
        write_file(dir / name, text);
        out.files.push_back((dir / name).string());
    }
    write_file(dir / "summary.json", dump(summary));
    out.files.push_back((dir / "summary.json").string());
    out.summary = std::move(summary);
    return out;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"flipwalk: flip graphs of k-angulations and lattice triangulations"};
    app.set_version_flag("--version", "flipwalk 0.1");
    std::vector<std::string> positional;
    app.add_option("args", positional, "command, then report inputs");
    std::string config_file;
    app.add_option("--config", config_file, "key = value or JSON config file");

    std::deque<std::string> store;
    std::vector<std::pair<std::string, CLI::Option*>> options;
    auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
        store.emplace_back();
        options.emplace_back(key, app.add_option(flag, store.back(), help));
    };
    opt("--command", "command", "enumerate | analyze | flow | cut | lattice | sample | report");
    opt("--k", "k", "face size");
    opt("--n", "n", "single n");
    opt("--n-range", "n_range", "A..B inclusive");
    opt("--seed", "seed", "walk seed");
    opt("--steps", "steps", "walk steps");
    opt("--thin", "thin", "record every thin-th state");
    opt("--start", "start", "walk start vertex");
    opt("--epsilon", "epsilon", "mixing threshold");
    opt("--cap", "cap", "enumeration cap");
    opt("--exact-cap", "exact_cap", "largest graph for exact mixing analysis");
    opt("--block", "block", "lattice block side");
    opt("--out", "out", "output directory");
    opt("--format", "format", "json | csv | dot | md");
    opt("--normalization", "normalization", "uniform | chain");
    bool exact = false, flt = false, full = false;
    auto* exact_flag = app.add_flag("--exact", exact, "exact flow arithmetic");
    auto* float_flag = app.add_flag("--float", flt, "skip per-commodity certification");
    exact_flag->excludes(float_flag);
    app.add_flag("--full-edges", full, "emit full edge lists");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        std::map<std::string, std::string> settings;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            if (!in) throw usage("cannot read config '" + config_file + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            settings = parse_config_text(ss.str());
        }
        if (!positional.empty()) {
            settings["command"] = positional.front();
            if (positional.size() > 1) {
                std::string joined;
                for (std::size_t i = 1; i < positional.size(); ++i) joined += (i > 1 ? "," : "") + positional[i];
                settings["inputs"] = joined;
            }
        }
        for (const auto& [key, o] : options)
            if (o->count()) settings[key] = o->as<std::string>();
        auto given = [&](const std::string& key) {
            for (const auto& [k, o] : options)
                if (k == key) return o->count() > 0;
            return false;
        };
        if (given("n") && !given("n_range")) settings.erase("n_range");
        if (exact) settings["arithmetic"] = "exact";
        if (flt) settings["arithmetic"] = "float";
        if (full) settings["full_edges"] = "true";

        ExperimentConfig c;
        apply_settings(c, settings);
        RunOutcome r = run(c);
        if (c.command == Command::Report && r.exit_code == 0) std::cout << r.message;
        else if (!r.message.empty()) std::cerr << "flipwalk: " << r.message << "\n";
        std::cout << (fs::path(c.out) / "summary.json").string() << "\n";
        return r.exit_code;
    } catch (const Error& e) {
        std::cerr << "flipwalk: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "flipwalk: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace flipwalk
