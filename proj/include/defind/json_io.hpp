#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "defind/calculus.hpp"
#include "defind/model.hpp"
#include "defind/weyl.hpp"

namespace defind::json_io {

/// Malformed input: JSON syntax errors or wrong shapes and types. Distinct
/// from semantic validation, which the model layer reports as violations.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[nodiscard]] model::RawConfig parse_config(std::istream& in);
[[nodiscard]] model::RawConfig parse_config_text(const std::string& text);

/// Pretty JSON, two-space indent, trailing newline. with_timestamp adds a
/// generated_at field; suppressing it makes reruns byte-identical.
[[nodiscard]] std::string report_json(const calculus::DeficiencyReport& report,
                                      bool with_timestamp);
[[nodiscard]] std::string oracle_json(const weyl::OracleResult& result, bool with_timestamp);

/// Verify report: every oracle result of a configuration under "results".
[[nodiscard]] std::string verify_json(std::span<const weyl::OracleResult> results,
                                      bool with_timestamp);

[[nodiscard]] std::string validation_json(const model::ValidationReport& report);

} // namespace defind::json_io
