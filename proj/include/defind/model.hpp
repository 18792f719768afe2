#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace defind::model {

/// Deficiency-index count: a nonnegative integer or infinity.
/// Infinity absorbs under addition.
class IndexCount {
public:
    constexpr IndexCount() = default;

    static constexpr IndexCount finite(std::uint64_t n) { return IndexCount(n, false); }
    static constexpr IndexCount infinite() { return IndexCount(0, true); }

    [[nodiscard]] constexpr bool is_infinite() const { return infinite_; }

    /// Finite value; meaningful only when !is_infinite().
    [[nodiscard]] constexpr std::uint64_t value() const { return value_; }

    constexpr IndexCount operator+(IndexCount other) const {
        if (infinite_ || other.infinite_) return infinite();
        return finite(value_ + other.value_);
    }
    constexpr IndexCount& operator+=(IndexCount other) { return *this = *this + other; }
    constexpr bool operator==(const IndexCount&) const = default;

private:
    constexpr IndexCount(std::uint64_t v, bool inf) : value_(v), infinite_(inf) {}
    std::uint64_t value_ = 0;
    bool infinite_ = false;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

/// One singular point of the planar operator: flux alpha, inverse-square
/// strength p and Coulomb strength q, all attached through the local
/// radial reduction around `position`.
struct Singularity {
    std::string id;
    Point position;
    double alpha = 0.0;
    double p = 0.0; ///< inverse-square strength, >= 0
    double q = 0.0; ///< Coulomb strength; q < 0 requires p > 0
};

/// Validated set of singular points plus the declared regular-part index.
/// Invariants: positions pairwise distinct, ids unique, min_separation
/// (when present) equals the smallest pairwise distance and is > 0.
struct Configuration {
    std::vector<Singularity> singularities;
    IndexCount background_index = IndexCount::finite(0);
    std::optional<double> min_separation; ///< nullopt: fewer than two points
};

enum class Rule { H1, H2, H3, LowerBound };

[[nodiscard]] std::string_view to_string(Rule r);

struct Violation {
    Rule rule;
    std::string code; ///< DUPLICATE_POSITION, NEGATIVE_P, UNBOUNDED_POTENTIAL, NONFINITE_FIELD, ...
    std::string message;
};

struct CutoffFeasibility {
    bool feasible = false;
    double delta = 0.0;
};

/// ok holds exactly when violations is empty.
struct ValidationReport {
    bool ok = false;
    std::vector<Violation> violations;
    CutoffFeasibility cutoff;
};

/// Unvalidated input, mirrors the wire format one to one.
struct RawSingularity {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    double alpha = 0.0;
    double p = 0.0;
    double q = 0.0;
};

struct RawConfig {
    std::vector<RawSingularity> singularities;
    bool background_infinite = false;
    std::int64_t background_index = 0; ///< ignored when background_infinite
};

struct BuildOutcome {
    std::optional<Configuration> config; ///< present iff report.ok
    ValidationReport report;
};

/// Smallest pairwise distance; nullopt when fewer than two points.
[[nodiscard]] std::optional<double> min_separation(std::span<const Point> points);

/// Disjoint-cutoff radius: a quarter of the smallest separation, with the
/// convention delta = 1 for configurations without a separation constraint.
[[nodiscard]] CutoffFeasibility cutoff_feasibility(const Configuration& config);
[[nodiscard]] CutoffFeasibility cutoff_feasibility(std::optional<double> min_sep);

/// Validates and assembles a Configuration. Collects every violation rather
/// than stopping at the first; the outcome carries a config iff ok.
[[nodiscard]] BuildOutcome build_configuration(const RawConfig& raw);

} // namespace defind::model
