#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kbahc::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;
inline constexpr int kNumericError = 4;

/// Flat run configuration. A JSON object with these keys may be given with
/// --config; command-line flags override it. Unknown keys are rejected.
struct RunConfig {
    std::string input;
    std::string input_kind = "returns";
    std::vector<int> k;  // empty: command default
    int m = 100;
    std::uint64_t seed = 42;
    std::vector<std::size_t> dt_in;  // empty: command default
    std::size_t dt_out = 21;
    double cost_bps = 2.0;
    bool long_only = false;
    std::vector<std::string> estimators;  // sample | cv | kbahc; empty: command default
    std::string out = "out";
    unsigned threads = 1;
    int cv_folds = 10;
    int reps = 200;
    std::size_t n_assets = 100;
    std::string start;  // ISO dates, empty for unbounded
    std::string end;
    std::string t_end;  // last calibration date for clean/spectra
    int windows = 1;    // spectra: number of consecutive calibration windows

    nlohmann::ordered_json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// Parses argv, runs the subcommand and maps failures to exit codes.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kbahc::cli
