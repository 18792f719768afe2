#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "defind/weyl.hpp"

namespace defind::cli {

enum class Command { Classify, Verify, Grid };

/// Inclusive sweep lo, lo+step, ..., hi (hi admitted within step*1e-9 slack).
struct AxisSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    [[nodiscard]] std::vector<double> values() const;
};

/// Parses "lo:hi:step" or a bare number (a one-point axis).
[[nodiscard]] std::optional<AxisSpec> parse_axis(const std::string& text);

enum ExitCode : int {
    kOk = 0,
    kValidationFailure = 2,
    kIoFailure = 3,
    kDisagreement = 4,
};

struct RunSpec {
    Command command = Command::Classify;
    std::string input_path;  ///< classify/verify: configuration file
    std::string output_path; ///< optional report destination; empty keeps stdout only
    bool no_timestamp = false;
    std::string format; ///< classify/verify: "table" (default) or "json"; grid: "csv"
    weyl::OracleOptions oracle;
    AxisSpec alpha_axis{0.1, 0.9, 0.1};
    AxisSpec p_axis{0.0, 0.0, 1.0};
    std::vector<double> q_values{0.0};
    int jobs = 1;
};

/// Closed-form classification: table and JSON report. Never touches the oracle.
[[nodiscard]] int run_classify(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Oracle cross-check of every singularity at both spectral signs. Boundary
/// inconclusives warn; genuine disagreement exits 4.
[[nodiscard]] int run_verify(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Agreement sweep over (alpha, p, q); CSV rows in axis order regardless of
/// --jobs. Rows with p = 0, q < 0 are skipped markers.
[[nodiscard]] int run_grid(const RunSpec& spec, std::ostream& out, std::ostream& err);

[[nodiscard]] int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

} // namespace defind::cli
