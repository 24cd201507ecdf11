#include <doctest.h>

#include "flipwalk/experiment.hpp"
#include "flipwalk/flownet.hpp"
#include "flipwalk/kangulation.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace flipwalk;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("flipwalk_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "flipwalk");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::Usage;
}

// worst-start TVD mixing time of the lazy walk with `moves` slots, dense doubles
std::size_t tau_oracle(const Graph& g, std::size_t moves, double eps) {
    const std::size_t n = g.num_vertices();
    std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
        P[x][x] = 1.0 - 0.5 * static_cast<double>(g.degree(x)) / static_cast<double>(moves);
        for (auto y : g.neighbors(x)) P[x][y] = 0.5 / static_cast<double>(moves);
    }
    std::size_t worst = 0;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> mu(n, 0.0), next(n);
        mu[s] = 1;
        std::size_t t = 0;
        auto dist = [&] {
            double d = 0;
            for (double x : mu) d += std::fabs(x - 1.0 / static_cast<double>(n));
            return d / 2;
        };
        while (dist() >= eps) {
            for (std::size_t y = 0; y < n; ++y) {
                next[y] = 0;
                for (std::size_t x = 0; x < n; ++x) next[y] += mu[x] * P[x][y];
            }
            mu.swap(next);
            ++t;
        }
        worst = std::max(worst, t);
    }
    return worst;
}

}  // namespace

TEST_CASE("config text: key = value with comments") {
    auto s = parse_config_text("# sweep\ncommand = analyze\nk=3\n\nn_range = 2..6   # inclusive\nformat = \"csv\"\n");
    CHECK(s.size() == 4);
    CHECK(s["command"] == "analyze");
    CHECK(s["n_range"] == "2..6");
    CHECK(s["format"] == "csv");
    ExperimentConfig c;
    apply_settings(c, s);
    CHECK(c.command == Command::Analyze);
    CHECK(c.n_lo == 2);
    CHECK(c.n_hi == 6);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("config text: JSON object") {
    auto s = parse_config_text(R"({"command": "sample", "n": 5, "seed": 9, "epsilon": 0.125, "full-edges": true,
                                   "n_range": [3, 4], "inputs": ["a.json", "b.json"]})");
    ExperimentConfig c;
    apply_settings(c, s);
    CHECK(c.command == Command::Sample);
    CHECK(c.seed == 9u);
    CHECK(c.epsilon == 0.125);
    CHECK(c.full_edges);
    CHECK(c.n_lo == 3);
    CHECK(c.n_hi == 4);
    CHECK(c.inputs == std::vector<std::string>{"a.json", "b.json"});
}

TEST_CASE("config diagnostics name the line or field") {
    auto message = [](const std::string& text) {
        try {
            ExperimentConfig c;
            apply_settings(c, parse_config_text(text));
            validate(c);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Usage);
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("k = 3\nthis is not a pair\n").find("line 2") != std::string::npos);
    CHECK(message("k = 3\nk = 4\n").find("duplicate") != std::string::npos);
    CHECK(message("colour = red\n").find("unknown key 'colour'") != std::string::npos);
    CHECK(message("k = three\n").find("field 'k'") != std::string::npos);
    CHECK(message("n_range = 6..2\n").find("empty range") != std::string::npos);
    CHECK(message("cap = 0\n").find("field 'cap'") != std::string::npos);
    CHECK(message("command = sample\n").find("needs a seed") != std::string::npos);
    CHECK(message("command = flow\nk = 4\n").find("field 'k'") != std::string::npos);
    CHECK(message("epsilon = 1.5\n").find("field 'epsilon'") != std::string::npos);
    CHECK(message("format = png\n").find("field 'format'") != std::string::npos);
    CHECK(message("{\"k\": [1, 2]}").find("unsupported") != std::string::npos);
    CHECK(message("{\"k\": 3,").find("config") != std::string::npos);
}

TEST_CASE("exit code protocol") {
    CHECK(exit_code_for(ErrorKind::Usage) == 2);
    CHECK(exit_code_for(ErrorKind::LemmaViolation) == 3);
    CHECK(exit_code_for(ErrorKind::StructureMismatch) == 3);
    CHECK(exit_code_for(ErrorKind::EnumerationTooLarge) == 4);
    CHECK(exit_code_for(ErrorKind::TooLarge) == 4);
}

TEST_CASE("analyze sweep writes one summary per n plus the run summary") {
    const fs::path out = scratch("analyze");
    ExperimentConfig c;
    c.command = Command::Analyze;
    c.n_lo = 2;
    c.n_hi = 6;
    c.out = out.string();
    RunOutcome r = run(c);
    CHECK(r.exit_code == 0);
    std::size_t json_files = 0;
    for (auto& e : fs::directory_iterator(out)) json_files += e.path().extension() == ".json";
    CHECK(json_files == 6);
    const json s = json::parse(slurp(out / "summary.json"));
    REQUIRE(s["results"].size() == 5);
    for (const auto& row : s["results"]) {
        const int n = row["n"];
        const FlipGraph g = build_flip_graph(3, n);
        CHECK(row["vertices"] == g.size());
        CHECK(row["tau"] == tau_oracle(g.graph, static_cast<std::size_t>(n - 1), 0.25));
        CHECK(row["lemmas"]["cartesian"] == true);
        CHECK(json::parse(slurp(out / ("analyze_k3_n" + std::to_string(n) + ".json"))) == row);
    }
    // K_2: lazy walk on one edge; K_3: lazy walk on a 5-cycle with two slots
    CHECK(s["results"][0]["gap"].get<double>() == doctest::Approx(1.0));
    CHECK(s["results"][1]["gap"].get<double>() == doctest::Approx((1 - std::cos(2 * M_PI / 5)) / 2));
}

TEST_CASE("flow run is certified and conserves the aggregate") {
    const fs::path out = scratch("flow");
    CHECK(cli({"flow", "--n", "5", "--full-edges", "--out", out.string()}) == 0);
    const json row = json::parse(slurp(out / "flow_k3_n5.json"));
    CHECK(row["certified"] == true);
    CHECK(row["commodities_checked"] == 42);  // one per source, each against every target
    CHECK(row["matching_flow_within_cn"] == true);
    CHECK(row["combiner"]["within_bound"] == true);

    // every vertex sends and receives |V| - 1 units in the aggregate
    std::istringstream csv(slurp(out / "flow_arcs_k3_n5.csv"));
    std::string line;
    std::getline(csv, line);
    std::vector<Rational> net(42, 0);
    Rational top = 0;
    while (std::getline(csv, line)) {
        std::istringstream ls(line);
        std::string u, v, f;
        std::getline(ls, u, ',');
        std::getline(ls, v, ',');
        std::getline(ls, f);
        Rational q(f);
        q.canonicalize();
        net[std::stoul(u)] += q;
        net[std::stoul(v)] -= q;
        if (q > top) top = q;
    }
    for (const auto& x : net) CHECK(x == 0);
    CHECK(Rational(row["congestion"]["rho_num"].get<std::string>() + "/" +
                   row["congestion"]["rho_den"].get<std::string>()) == top / 42);
}

TEST_CASE("chain normalization doubles the uniform congestion") {
    const fs::path a = scratch("norm_u"), b = scratch("norm_c");
    CHECK(cli({"flow", "--n", "4", "--out", a.string()}) == 0);
    CHECK(cli({"flow", "--n", "4", "--normalization", "chain", "--out", b.string()}) == 0);
    const json u = json::parse(slurp(a / "flow_k3_n4.json"));
    const json c = json::parse(slurp(b / "flow_k3_n4.json"));
    CHECK(c["congestion"]["normalization"] == "chain");
    CHECK(c["flow_rho"].get<double>() == doctest::Approx(2 * u["flow_rho"].get<double>()));
}

TEST_CASE("malformed config exits 2 without writing") {
    const fs::path out = scratch("malformed");
    const fs::path cfg = fs::temp_directory_path() / "flipwalk_cli_bad.cfg";
    std::ofstream(cfg) << "command = analyze\nn_range = 2..\n";
    CHECK(cli({"--config", cfg.string(), "--out", out.string()}) == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(cli({"analyze", "--n", "x", "--out", out.string()}) == 2);
    CHECK(cli({"analyze", "--exact", "--float", "--out", out.string()}) == 2);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("resource cap exits 4 and still writes the summary") {
    const fs::path out = scratch("cap");
    CHECK(cli({"enumerate", "--n", "12", "--cap", "1000", "--out", out.string()}) == 4);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["error"]["kind"] == "enumeration-too-large");
    CHECK(s["exit_code"] == 4);
}

TEST_CASE("corrupted cached graph is reported as a violation") {
    const fs::path cache = scratch("cache_bad");
    fs::create_directories(cache);
    json g = to_json(build_flip_graph(3, 4));
    g["edges"].erase(g["edges"].begin());
    std::ofstream(cache / "flipgraph_k3_n4.json") << g.dump();
    ::setenv("FLIPWALK_CACHE_DIR", cache.c_str(), 1);
    const fs::path out = scratch("cache_bad_out");
    const int code = cli({"analyze", "--n", "4", "--out", out.string()});
    ::unsetenv("FLIPWALK_CACHE_DIR");
    CHECK(code == 3);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["exit_code"] == 3);
}

TEST_CASE("cache directory memoizes graphs without changing output") {
    const fs::path cache = scratch("cache");
    const fs::path a = scratch("cache_a"), b = scratch("cache_b"), plain = scratch("cache_plain");
    CHECK(cli({"enumerate", "--n-range", "3..5", "--out", plain.string()}) == 0);
    ::setenv("FLIPWALK_CACHE_DIR", cache.c_str(), 1);
    CHECK(cli({"enumerate", "--n-range", "3..5", "--out", a.string()}) == 0);
    CHECK(fs::exists(cache / "flipgraph_k3_n5.json"));
    CHECK(cli({"enumerate", "--n-range", "3..5", "--out", b.string()}) == 0);
    ::unsetenv("FLIPWALK_CACHE_DIR");
    CHECK(slurp(a / "summary.json") == slurp(plain / "summary.json"));
    CHECK(slurp(b / "summary.json") == slurp(plain / "summary.json"));
    CHECK(slurp(b / "graph_k3_n5.json") == slurp(plain / "graph_k3_n5.json"));
}

TEST_CASE("identical config and seed give identical bytes") {
    const fs::path cfg = fs::temp_directory_path() / "flipwalk_cli_sample.cfg";
    std::ofstream(cfg) << "command = sample\nn = 5\nseed = 1234\nsteps = 20000\nthin = 10\nformat = csv\n";
    const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    CHECK(cli({"--config", cfg.string(), "--out", a.string()}) == 0);
    CHECK(cli({"--config", cfg.string(), "--out", b.string()}) == 0);
    for (const char* f : {"summary.json", "sample_k3_n5.json", "sample_k3_n5.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    // a flag overrides the file
    CHECK(cli({"--config", cfg.string(), "--seed", "99", "--out", c.string()}) == 0);
    const json s = json::parse(slurp(c / "summary.json"));
    CHECK(s["config"]["seed"] == 99);
    CHECK(slurp(a / "summary.json") != slurp(c / "summary.json"));
}

TEST_CASE("report table") {
    CHECK(report_table({}) == "n,|V|,degree,gap,tau(1/4),cheeger_lo,cheeger_hi,flow_rho,cut_ratio\n");
    const std::string md = report_table({}, "md");
    CHECK(md.find("\\|V\\|") != std::string::npos);
    CHECK(std::count(md.begin(), md.end(), '\n') == 2);

    const fs::path out = scratch("report_src");
    CHECK(cli({"analyze", "--n-range", "2..6", "--out", out.string()}) == 0);
    const json s = json::parse(slurp(out / "summary.json"));
    std::vector<json> rows(s["results"].begin(), s["results"].end());
    const std::string t = report_table(rows);
    CHECK(std::count(t.begin(), t.end(), '\n') == 6);
    CHECK(t.find("\n2,2,1,1,1,") != std::string::npos);

    auto mixed = rows;
    mixed.back()["k"] = 4;
    CHECK(kind_of([&] { report_table(mixed); }) == ErrorKind::SchemaMismatch);
    CHECK(kind_of([&] { report_table({json{{"n", 3}}}); }) == ErrorKind::SchemaMismatch);

    const fs::path rep = scratch("report_out");
    CHECK(cli({"report", (out / "summary.json").string(), "--format", "md", "--out", rep.string()}) == 0);
    CHECK(slurp(rep / "report.md") == report_table(rows, "md"));
}

TEST_CASE("lattice and cut commands") {
    const fs::path out = scratch("lattice");
    CHECK(cli({"lattice", "--n-range", "2..3", "--format", "dot", "--out", out.string()}) == 0);
    const json s = json::parse(slurp(out / "summary.json"));
    CHECK(s["results"][0]["vertices"] == 2);
    CHECK(s["results"][1]["oracles_agree"] == true);
    CHECK(slurp(out / "lattice_n2.dot").rfind("graph F_2 {", 0) == 0);

    const fs::path cut = scratch("cut");
    CHECK(cli({"cut", "--n-range", "3..4", "--out", cut.string()}) == 0);
    const json c = json::parse(slurp(cut / "summary.json"));
    // K_3 is the 5-cycle: two adjacent vertices have two boundary edges
    CHECK(c["results"][0]["expansion"]["exact"] == "1");
}
