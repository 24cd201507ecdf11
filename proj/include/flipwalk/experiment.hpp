#pragma once

#include "flipwalk/error.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace flipwalk {

enum class Command { Enumerate, Analyze, Flow, Cut, Lattice, Sample, Report };

struct ExperimentConfig {
    Command command = Command::Analyze;
    int k = 3;
    int n_lo = 4;
    int n_hi = 4;
    std::optional<std::uint64_t> seed;
    std::uint64_t steps = 100000;
    std::uint64_t thin = 1;
    std::uint32_t start = 0;
    double epsilon = 0.25;
    std::uint64_t cap = 5000000;       // enumeration cap
    std::uint64_t exact_cap = 300000;  // exact mixing analysis cap
    int block = 2;
    bool exact = true;
    bool full_edges = false;
    std::string normalization = "uniform";  // flow congestion: uniform | chain
    std::string out = ".";
    std::string format = "json";
    std::vector<std::string> inputs;  // report inputs
};

// key = value lines (# comments) or one JSON object; errors carry the line
std::map<std::string, std::string> parse_config_text(const std::string& text);
// unknown keys and bad values are usage errors naming the key
void apply_settings(ExperimentConfig& c, const std::map<std::string, std::string>& settings);
void validate(const ExperimentConfig& c);

std::string command_name(Command c);
int exit_code_for(ErrorKind kind);

struct RunOutcome {
    int exit_code = 0;
    nlohmann::json summary;
    std::vector<std::string> files;
    std::string message;
};

// writes artifacts under c.out; summary.json is written whenever the config is valid
RunOutcome run(const ExperimentConfig& c);

// rows: per-n summaries of one k; format csv or md
std::string report_table(const std::vector<nlohmann::json>& rows, const std::string& format = "csv");

// full command line: flags override the config file
int cli_main(int argc, const char* const* argv);

}  // namespace flipwalk
