#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "defind/calculus.hpp"
#include "defind/model.hpp"
#include "defind/odeflow.hpp"

namespace defind::weyl {

using odeflow::Complex;

/// Reduced radial problem -u'' + ((nu^2 - 1/4)/r^2 + q/r) u = lambda u,
/// probed off the real axis.
struct RadialProblem {
    double nu_squared = 0.0;
    double q = 0.0;
    Complex lambda{0.0, 1.0};
};

enum class LambdaSign { PlusI, MinusI };

[[nodiscard]] Complex lambda_of(LambdaSign sign);
[[nodiscard]] std::string_view to_string(LambdaSign sign);

struct OracleOptions {
    double rel_tol = 1e-12;
    double r_min = 1e-8;
    double r_mid = 1.0;
    double r_max = 40.0;
    /// |nu^2 - 1| below this is not integrated: the indicial exponent sits too
    /// close to the square-integrability borderline for finite precision.
    double boundary_band = 1e-2;
    double exponent_margin = 0.02; ///< abstention band of the exponent vote around -1/2
    double ratio_margin = 0.01;    ///< abstention band of the decade-ratio vote around 1
    int samples_per_decade = 32;
};

struct FrobeniusExponents {
    double mu_plus = 0.0;
    double mu_minus = 0.0;
    bool log_case = false; ///< double root at nu = 0; second solution carries log r
};

[[nodiscard]] FrobeniusExponents frobenius_exponents(double nu_squared);

[[nodiscard]] odeflow::LinearOde make_radial_ode(const RadialProblem& problem);

struct SeriesSeed {
    Complex u{0.0, 0.0};
    Complex du{0.0, 0.0};
    int terms = 0;
};

/// Frobenius-series value of the branch r^mu (1 + ...) at r0, truncated once
/// the next term falls below series_tol relatively.
[[nodiscard]] SeriesSeed seed_solution_near_zero(const RadialProblem& problem, double mu,
                                                 double r0, double series_tol = 1e-10);

enum class Verdict { LimitPoint, LimitCircle, Inconclusive };

[[nodiscard]] std::string_view to_string(Verdict v);

/// Per-solution measurements backing an endpoint verdict.
struct SolutionEvidence {
    double exponent = 0.0;          ///< regression slope near the endpoint (zero side)
    double exponent_residual = 0.0;
    double integral_ratio = 0.0;    ///< median adjacent-decade mass ratio (zero side)
    double growth_rate = 0.0;       ///< exponential rate (infinity side)
};

struct EndpointReport {
    Verdict verdict = Verdict::Inconclusive;
    std::optional<int> l2_count; ///< 1 or 2, absent when inconclusive
    std::vector<SolutionEvidence> solutions;
    double wronskian_drift = 0.0; ///< over the well-conditioned span; 0 when not integrated
    std::string note;
};

/// Counts square-integrable solutions near r = 0 by integrating two
/// independent solutions inward (log-radius stepping) and combining an
/// exponent vote with a partial-integral vote. Disagreeing definite votes
/// are inconclusive. nu^2 = 0 and nu^2 = 1 resolve analytically.
[[nodiscard]] EndpointReport count_l2_solutions_at_zero(const RadialProblem& problem,
                                                        const OracleOptions& options = {});

/// Counts square-integrable directions at infinity: one generic solution
/// swept outward (must grow) and one swept inward from r_max (tracks the
/// decaying direction). Expected count is 1 whenever Im lambda != 0.
[[nodiscard]] EndpointReport count_l2_solutions_at_infinity(const RadialProblem& problem,
                                                            const OracleOptions& options = {});

struct ExponentEstimate {
    double mu_hat = 0.0;
    double residual = 0.0; ///< RMS of log-log deviations per sample
};

/// Least-squares power-law exponent of |u| against r.
[[nodiscard]] ExponentEstimate estimate_exponent(
    std::span<const std::pair<double, double>> r_absu);

/// One angular sector probed at both endpoints. index = m0 + minf - 2.
struct HarmonicProbe {
    int ell = 0;
    double nu_squared = 0.0;
    std::optional<int> m0;
    std::optional<int> m_inf;
    std::optional<int> index; ///< absent means inconclusive
    std::string reason;       ///< why inconclusive, empty otherwise
    double wronskian_drift = 0.0;
    EndpointReport zero;
    EndpointReport infinity;
};

[[nodiscard]] HarmonicProbe numerical_harmonic_index(const RadialProblem& problem,
                                                     const OracleOptions& options = {});

enum class Agreement { Agree, Disagree, NotRun };

struct OracleResult {
    std::string id;
    LambdaSign lambda = LambdaSign::PlusI;
    std::vector<HarmonicProbe> harmonics; ///< full calculus scan window, ascending ell
    std::optional<int> total;             ///< absent means inconclusive
    Agreement agreement = Agreement::NotRun;
    double max_wronskian_drift = 0.0;
};

/// Scans the same sector window as the closed form and compares totals.
[[nodiscard]] OracleResult numerical_singularity_index(const model::Singularity& s,
                                                       LambdaSign sign,
                                                       const OracleOptions& options = {});

} // namespace defind::weyl
