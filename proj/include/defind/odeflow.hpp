#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace defind::odeflow {

using Complex = std::complex<double>;

enum class ErrorCode {
    StepCollapse,
    DomainViolation,
    DegenerateSamples,
    SeriesNotConverged,
    ResonantIndicial,
    IntegrationFailure,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

class OdeError : public std::runtime_error {
public:
    OdeError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    [[nodiscard]] ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

/// c(r) = c2 / r^2 + c1 / r + c0. Declaring this structure is what makes the
/// log-radius transform available, since the transformed coefficient
/// c2 + c1 r + c0 r^2 must be formed without the 1/r^2 blowup.
struct InverseSquareCoeff {
    Complex c2{0.0, 0.0};
    Complex c1{0.0, 0.0};
    Complex c0{0.0, 0.0};
    [[nodiscard]] Complex operator()(double r) const { return c2 / (r * r) + c1 / r + c0; }
};

/// Scalar second-order problem u'' = c(r) u on an open interval.
struct LinearOde {
    std::function<Complex(double)> coeff;
    double domain_lo = 0.0;
    double domain_hi = std::numeric_limits<double>::infinity();
    std::optional<InverseSquareCoeff> structured;

    [[nodiscard]] static LinearOde from_structured(
        InverseSquareCoeff c, double lo = 0.0,
        double hi = std::numeric_limits<double>::infinity());

    [[nodiscard]] Complex eval(double r) const { return structured ? (*structured)(r) : coeff(r); }
};

/// Stored values carry the renormalization ledger: the true solution at a
/// sample is u * exp(log_scale), likewise du.
struct Sample {
    double r = 0.0;
    Complex u{0.0, 0.0};
    Complex du{0.0, 0.0};
    double log_scale = 0.0;
};

struct RenormEvent {
    double r = 0.0;
    double log_factor = 0.0; ///< natural log of the factor divided out
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double h_min = std::numeric_limits<double>::infinity();
    double h_max = 0.0;
};

struct Trajectory {
    std::vector<Sample> samples; ///< strictly monotone in r, traversal order
    std::vector<RenormEvent> renorms;
    StepStats stats;
    bool log_stepped = false;

    [[nodiscard]] Complex final_u() const;  ///< scale reapplied; may overflow for huge ledgers
    [[nodiscard]] Complex final_du() const;
    [[nodiscard]] double span_length() const;
    [[nodiscard]] double span_decades() const;
};

struct IntegrateOptions {
    double rel_tol = 1e-10; ///< in [1e-13, 1e-3]
    double renorm_threshold = 1e100;
    int samples_per_decade = 32;  ///< log-stepped default grid
    double samples_per_unit = 8.0; ///< direct default grid
    /// Ascending r values inside the integration range; overrides the default grid.
    std::optional<std::vector<double>> sample_points;
};

/// Adaptive embedded Runge-Kutta sweep from r_from to r_to (either direction),
/// dense output at the sample grid, renormalization above the threshold.
[[nodiscard]] Trajectory integrate(const LinearOde& ode, double r_from, Complex u0, Complex du0,
                                   double r_to, const IntegrateOptions& options = {});

/// Same sweep in t = ln r, for ranges reaching far toward r = 0. Requires the
/// declared inverse-square structure. Samples are logarithmically placed.
[[nodiscard]] Trajectory log_transform_integrate(const LinearOde& ode, double r_from, Complex u0,
                                                 Complex du0, double r_to,
                                                 const IntegrateOptions& options = {});

enum class GrowthClass { Growing, Decaying, PowerLaw, Unresolved };

[[nodiscard]] std::string_view to_string(GrowthClass c);

/// rate is the log-magnitude slope per unit r for the exponential verdicts,
/// and the power-law exponent for PowerLaw.
struct GrowthReport {
    GrowthClass cls = GrowthClass::Unresolved;
    double rate = 0.0;
    double residual_exponential = 0.0;
    double residual_power = 0.0;
};

/// Fits log|u| against r and against log r and keeps the better model;
/// residuals within 10 percent of each other are declared Unresolved.
[[nodiscard]] GrowthReport growth_monitor(const Trajectory& trajectory);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

[[nodiscard]] LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Plot-ready dump: header plus one row per sample with columns
/// r, re_u, im_u, re_du, im_du, scale_exponent.
void dump_csv(const Trajectory& trajectory, std::ostream& out);

} // namespace defind::odeflow
