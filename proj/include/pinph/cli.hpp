#pragma once

// Subcommands of the `pinph` tool. Each reads a RunConfig, writes its
// outputs under RunConfig::out and returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pinph/estimator.hpp"
#include "pinph/ingest.hpp"
#include "pinph/model.hpp"

namespace pinph::cli {

// sysexits.h values.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 64,
    kInputError = 65,
    kEmptyInput = 66,
    kNumericalFailure = 70,
    kIoError = 74,
};

inline constexpr const char* kVersion = "0.1.0";

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Key-value run configuration; every key may come from the config file,
/// from `--set key=value`, or from a dedicated flag.
struct RunConfig {
    std::map<std::string, std::string> values;

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback = "") const;
    /// Path of an input, throwing UsageError when it is required and unset.
    std::string path(const std::string& key) const;
    double real(const std::string& key, double fallback) const;
    int64_t integer(const std::string& key, int64_t fallback) const;
    uint64_t seed() const;

    PeriodScheme scheme() const;
    EstimatorConfig estimator() const;
    ParameterSet theta() const;

    /// FNV-1a over the sorted key-value pairs, excluding keys that cannot
    /// change results (threads, out).
    uint64_t hash() const;
    /// "# pinph <version> command=<cmd> config_hash=<hex> seed=<n>"
    std::string provenance(const std::string& command) const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in, const std::string& origin = "<config>");

int cmd_ingest(const RunConfig& config, std::ostream& log);
int cmd_estimate(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_recover(const RunConfig& config, std::ostream& log);
int cmd_report(const RunConfig& config, std::ostream& log);

/// Full command-line entry point: `pinph <command> [flags]`.
int run(int argc, const char* const* argv, std::ostream& log);

}  // namespace pinph::cli
