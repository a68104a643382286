#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lbctl/config.hpp"
#include "lbctl/diagnostics.hpp"
#include "lbctl/verify.hpp"

namespace lbctl {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  // overrides the config
    std::optional<bool> dump_fields;               // overrides the config
    unsigned jobs = 1;
    std::ostream* log = nullptr;
};

struct RunOutcome {
    /// 0 when every configured check passed, 1 otherwise. Failures of the
    /// library itself are thrown as lbctl::Error with their own codes.
    int exit_code = 0;
    Report report;
    std::vector<CheckResult> checks;
    std::vector<std::filesystem::path> artifacts;  // deterministic files only
    std::filesystem::path timing_file;             // wall time, not deterministic
    double wall_time_s = 0.0;
};

/// Runs one experiment and writes its artifacts under the output directory,
/// all named <kind>-<config hash>.*:
///   .config.json  resolved config     .report.txt  key = value report
///   .energy.csv   energy trace        .decay.csv   free-decay phase (large-time)
///   .trajectory.lbf / .controls.lbf   field dumps (dump_fields only)
///   .timing.txt   wall time
RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace lbctl
