#include "defind/model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace defind::model {

std::string_view to_string(Rule r) {
    switch (r) {
        case Rule::H1: return "H1";
        case Rule::H2: return "H2";
        case Rule::H3: return "H3";
        case Rule::LowerBound: return "LOWER_BOUND";
    }
    return "?";
}

std::optional<double> min_separation(std::span<const Point> points) {
    if (points.size() < 2) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double dx = points[i].x - points[j].x;
            const double dy = points[i].y - points[j].y;
            best = std::min(best, std::hypot(dx, dy));
        }
    }
    return best;
}

CutoffFeasibility cutoff_feasibility(std::optional<double> min_sep) {
    if (!min_sep) return {true, 1.0}; // no constraint to satisfy, conventional radius
    if (*min_sep > 0.0) return {true, *min_sep / 4.0};
    return {false, 0.0};
}

CutoffFeasibility cutoff_feasibility(const Configuration& config) {
    return cutoff_feasibility(config.min_separation);
}

namespace {

void add_violation(ValidationReport& report, Rule rule, std::string code, std::string message) {
    report.violations.push_back({rule, std::move(code), std::move(message)});
}

bool all_finite(const RawSingularity& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.alpha) &&
           std::isfinite(s.p) && std::isfinite(s.q);
}

} // namespace

BuildOutcome build_configuration(const RawConfig& raw) {
    BuildOutcome out;
    ValidationReport& report = out.report;

    std::set<std::string> ids;
    for (const auto& s : raw.singularities) {
        if (!ids.insert(s.id).second) {
            add_violation(report, Rule::H1, "DUPLICATE_ID",
                          "singularity id '" + s.id + "' appears more than once");
        }
        if (!all_finite(s)) {
            add_violation(report, Rule::H2, "NONFINITE_FIELD",
                          "singularity '" + s.id + "' has a non-finite field");
            continue; // remaining checks are meaningless on NaN/inf input
        }
        if (s.p < 0.0) {
            std::ostringstream msg;
            msg << "singularity '" << s.id << "': p = " << s.p << " but p >= 0 is required";
            add_violation(report, Rule::LowerBound, "NEGATIVE_P", msg.str());
        }
        if (s.q < 0.0 && s.p <= 0.0) {
            std::ostringstream msg;
            msg << "singularity '" << s.id
                << "': q < 0 with p = 0 leaves the radial potential unbounded below";
            add_violation(report, Rule::LowerBound, "UNBOUNDED_POTENTIAL", msg.str());
        }
    }

    std::vector<Point> points;
    points.reserve(raw.singularities.size());
    for (const auto& s : raw.singularities) points.push_back({s.x, s.y});
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (points[i] == points[j]) {
                std::ostringstream msg;
                msg << "singularities '" << raw.singularities[i].id << "' and '"
                    << raw.singularities[j].id << "' share position (" << points[i].x << ", "
                    << points[i].y << ")";
                add_violation(report, Rule::H3, "DUPLICATE_POSITION", msg.str());
            }
        }
    }

    if (!raw.background_infinite && raw.background_index < 0) {
        add_violation(report, Rule::H1, "NEGATIVE_BACKGROUND",
                      "background_index must be a nonnegative integer or \"infinite\"");
    }

    const auto sep = min_separation(points);
    report.cutoff = cutoff_feasibility(sep);
    report.ok = report.violations.empty();
    if (!report.ok) return out;

    Configuration config;
    config.min_separation = sep;
    config.background_index = raw.background_infinite
                                  ? IndexCount::infinite()
                                  : IndexCount::finite(static_cast<std::uint64_t>(raw.background_index));
    config.singularities.reserve(raw.singularities.size());
    for (const auto& s : raw.singularities) {
        config.singularities.push_back({s.id, {s.x, s.y}, s.alpha, s.p, s.q});
    }
    out.config = std::move(config);
    return out;
}

} // namespace defind::model
