#include "defind/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace defind::weyl {

using odeflow::ErrorCode;
using odeflow::OdeError;
using odeflow::Trajectory;

Complex lambda_of(LambdaSign sign) {
    return sign == LambdaSign::PlusI ? Complex{0.0, 1.0} : Complex{0.0, -1.0};
}

std::string_view to_string(LambdaSign sign) { return sign == LambdaSign::PlusI ? "+i" : "-i"; }

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::LimitPoint: return "LIMIT_POINT";
        case Verdict::LimitCircle: return "LIMIT_CIRCLE";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

FrobeniusExponents frobenius_exponents(double nu_squared) {
    if (!(nu_squared >= 0.0)) throw std::invalid_argument("nu_squared must be nonnegative");
    const double nu = std::sqrt(nu_squared);
    return {0.5 + nu, 0.5 - nu, nu_squared == 0.0};
}

odeflow::LinearOde make_radial_ode(const RadialProblem& problem) {
    return odeflow::LinearOde::from_structured({Complex{problem.nu_squared - 0.25, 0.0},
                                                Complex{problem.q, 0.0}, -problem.lambda});
}

SeriesSeed seed_solution_near_zero(const RadialProblem& problem, double mu, double r0,
                                   double series_tol) {
    if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
    const double nu2 = problem.nu_squared;
    if (std::abs(mu * (mu - 1.0) - (nu2 - 0.25)) > 1e-8 * (1.0 + std::abs(nu2))) {
        throw std::invalid_argument("mu is not an indicial exponent of this problem");
    }
    const double nu = std::sqrt(nu2);
    const double branch = mu >= 0.5 ? 2.0 * nu : -2.0 * nu;

    // c_k k(k + branch) = q c_{k-1} - lambda c_{k-2}; a vanishing denominator
    // with surviving numerator marks the log-coupled resonant branch
    constexpr int kMaxTerms = 80;
    std::vector<Complex> c(kMaxTerms + 1);
    c[0] = {1.0, 0.0};
    double max_mag = 1.0;
    Complex s{1.0, 0.0};
    Complex sd{mu, 0.0};
    double rk = 1.0;
    int used = 0;
    double prev_term = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int k = 1; k <= kMaxTerms; ++k) {
        const Complex num =
            problem.q * c[k - 1] - (k >= 2 ? problem.lambda * c[k - 2] : Complex{0.0, 0.0});
        const double den = static_cast<double>(k) * (static_cast<double>(k) + branch);
        if (den == 0.0) {
            if (std::abs(num) <= 1e-14 * max_mag) {
                c[k] = {0.0, 0.0};
            } else {
                throw OdeError(ErrorCode::ResonantIndicial,
                               "second indicial branch is log-coupled; no pure power series");
            }
        } else {
            c[k] = num / den;
        }
        max_mag = std::max(max_mag, std::abs(c[k]));
        rk *= r0;
        const Complex term = c[k] * rk;
        s += term;
        sd += (mu + static_cast<double>(k)) * term;
        used = k;
        const double mag = std::abs(term);
        // the recurrence couples two back terms, so demand two consecutive small ones
        if (k >= 2 && mag < series_tol * std::abs(s) && prev_term < series_tol * std::abs(s)) {
            converged = true;
            break;
        }
        prev_term = mag;
    }
    if (!converged) {
        throw OdeError(ErrorCode::SeriesNotConverged,
                       "r0 too large for the requested series tolerance");
    }
    return {std::pow(r0, mu) * s, std::pow(r0, mu - 1.0) * sd, used};
}

ExponentEstimate estimate_exponent(std::span<const std::pair<double, double>> r_absu) {
    std::vector<double> lx, ly;
    lx.reserve(r_absu.size());
    ly.reserve(r_absu.size());
    for (const auto& [r, m] : r_absu) {
        if (!(r > 0.0) || !(m > 0.0)) continue;
        lx.push_back(std::log(r));
        ly.push_back(std::log(m));
    }
    if (lx.size() < 8) {
        throw OdeError(ErrorCode::DegenerateSamples,
                       "exponent fit needs at least 8 positive samples");
    }
    const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
    if (*hi - *lo < 3.0 * std::log(10.0)) {
        throw OdeError(ErrorCode::DegenerateSamples, "exponent fit needs at least 3 decades");
    }
    const odeflow::LineFit fit = odeflow::fit_line(lx, ly);
    return {fit.slope, fit.rms};
}

namespace {

constexpr double kLogCaseEps = 1e-20;
constexpr double kExactBoundaryEps = 1e-12;
// Near r = 0 both tracked solutions collapse onto the dominant branch and the
// Wronskian turns into a difference of huge near-equal products; past this
// headroom double precision cannot express a 1e-8 relative drift, so those
// samples are excluded from the drift measurement.
constexpr double kConditioningHeadroom = 1e6;
constexpr double kMaxReconstructLog = 500.0;

void require_offaxis(const RadialProblem& problem) {
    if (problem.lambda.imag() == 0.0) {
        throw std::invalid_argument("spectral parameter must have nonzero imaginary part");
    }
    if (!(problem.nu_squared >= 0.0)) {
        throw std::invalid_argument("nu_squared must be nonnegative");
    }
}

struct AscendingTrack {
    std::vector<double> r;
    std::vector<double> lnr;
    std::vector<double> lnu;    // ln|u| with the ledger scale reapplied
    std::vector<Complex> u, du; // stored values
    std::vector<double> scale;  // ledger log factors
};

AscendingTrack ascending_track(const Trajectory& traj) {
    AscendingTrack t;
    const auto& ss = traj.samples;
    const bool reversed = ss.size() > 1 && ss.front().r > ss.back().r;
    const std::size_t n = ss.size();
    t.r.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = ss[reversed ? n - 1 - i : i];
        t.r.push_back(s.r);
        t.lnr.push_back(std::log(s.r));
        t.lnu.push_back(std::log(std::abs(s.u)) + s.log_scale);
        t.u.push_back(s.u);
        t.du.push_back(s.du);
        t.scale.push_back(s.log_scale);
    }
    return t;
}

// Median ratio of adjacent decade masses of |u|^2 dr over [r_lo, r_hi],
// deeper decade over shallower. Below 1 the mass series converges at 0.
double decade_mass_ratio(const AscendingTrack& t, double r_lo, double r_hi) {
    std::vector<double> log_mass;
    double b = r_lo;
    while (b < r_hi * 0.999) {
        const double b_hi = std::min(b * 10.0, r_hi);
        double peak = -std::numeric_limits<double>::infinity();
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < t.r.size(); ++i) {
            if (t.r[i] >= b * 0.9999999 && t.r[i] <= b_hi * 1.0000001) {
                idx.push_back(i);
                peak = std::max(peak, t.lnu[i]);
            }
        }
        if (idx.size() >= 2 && std::isfinite(peak)) {
            double mass = 0.0;
            for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
                const std::size_t i0 = idx[j], i1 = idx[j + 1];
                const double m0 = std::exp(2.0 * (t.lnu[i0] - peak));
                const double m1 = std::exp(2.0 * (t.lnu[i1] - peak));
                mass += 0.5 * (m0 + m1) * (t.r[i1] - t.r[i0]);
            }
            if (mass > 0.0) log_mass.push_back(2.0 * peak + std::log(mass));
        }
        b = b_hi;
    }
    if (log_mass.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ratios;
    for (std::size_t d = 0; d + 1 < log_mass.size(); ++d) {
        ratios.push_back(std::exp(log_mass[d] - log_mass[d + 1]));
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
    return ratios[ratios.size() / 2];
}

// Relative Wronskian drift across two solutions of the same equation sampled
// on one grid, restricted to the well-conditioned span.
double wronskian_drift(const AscendingTrack& a, const AscendingTrack& b) {
    const std::size_t n = std::min(a.r.size(), b.r.size());
    std::vector<double> w_abs(n, 0.0), n_abs(n, 0.0);
    std::vector<Complex> w(n, Complex{0.0, 0.0});
    std::vector<bool> usable(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        if (a.r[k] != b.r[k]) continue;
        const double s = a.scale[k] + b.scale[k];
        if (std::abs(s) > kMaxReconstructLog) continue;
        const double es = std::exp(s);
        // each cross product carries one scale factor from either trajectory
        const Complex wk = (a.u[k] * b.du[k] - b.u[k] * a.du[k]) * es;
        const double nk = (std::abs(a.u[k]) * std::abs(b.du[k]) +
                           std::abs(b.u[k]) * std::abs(a.du[k])) *
                          es;
        w[k] = wk;
        w_abs[k] = std::abs(wk);
        n_abs[k] = nk;
        usable[k] = true;
    }
    // reference where the Wronskian is best conditioned
    double best = 0.0;
    std::size_t ref = n;
    for (std::size_t k = 0; k < n; ++k) {
        if (!usable[k] || n_abs[k] == 0.0) continue;
        const double quality = w_abs[k] / n_abs[k];
        if (ref == n || quality > best) {
            best = quality;
            ref = k;
        }
    }
    if (ref == n || w_abs[ref] == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const Complex w_ref = w[ref];
    const double w_ref_abs = std::abs(w_ref);
    double drift = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!usable[k]) continue;
        if (n_abs[k] > kConditioningHeadroom * w_ref_abs) continue;
        drift = std::max(drift, std::abs(w[k] - w_ref) / w_ref_abs);
    }
    return drift;
}

enum class Vote { Yes, No, Abstain };

Vote exponent_vote(double mu_hat, const OracleOptions& opt) {
    if (mu_hat > -0.5 + opt.exponent_margin) return Vote::Yes;
    if (mu_hat < -0.5 - opt.exponent_margin) return Vote::No;
    return Vote::Abstain;
}

Vote integral_vote(double ratio, const OracleOptions& opt) {
    if (!std::isfinite(ratio)) return Vote::Abstain;
    if (ratio < 1.0 - opt.ratio_margin) return Vote::Yes;
    if (ratio > 1.0 + opt.ratio_margin) return Vote::No;
    return Vote::Abstain;
}

} // namespace

EndpointReport count_l2_solutions_at_zero(const RadialProblem& problem,
                                          const OracleOptions& opt) {
    require_offaxis(problem);
    const double nu2 = problem.nu_squared;

    EndpointReport report;
    if (nu2 <= kLogCaseEps) {
        report.verdict = Verdict::LimitCircle;
        report.l2_count = 2;
        report.note = "double indicial root 1/2: power and log branches both square integrable";
        return report;
    }
    if (std::abs(nu2 - 1.0) <= kExactBoundaryEps) {
        report.verdict = Verdict::LimitPoint;
        report.l2_count = 1;
        report.note = "indicial exponent exactly -1/2: borderline branch not square integrable";
        return report;
    }
    if (std::abs(nu2 - 1.0) < opt.boundary_band) {
        report.verdict = Verdict::Inconclusive;
        report.note = "inside indicial boundary band";
        return report;
    }

    const odeflow::LinearOde ode = make_radial_ode(problem);
    odeflow::IntegrateOptions iopt;
    iopt.rel_tol = opt.rel_tol;
    iopt.samples_per_decade = opt.samples_per_decade;

    const double window_top = opt.r_min * 1e4;
    const Complex seeds[2][2] = {{{1.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}}};

    AscendingTrack tracks[2];
    Vote votes[2];
    for (int sidx = 0; sidx < 2; ++sidx) {
        const Trajectory traj = odeflow::log_transform_integrate(
            ode, opt.r_mid, seeds[sidx][0], seeds[sidx][1], opt.r_min, iopt);
        tracks[sidx] = ascending_track(traj);
        const AscendingTrack& t = tracks[sidx];

        std::vector<double> wx, wy;
        for (std::size_t i = 0; i < t.r.size(); ++i) {
            if (t.r[i] <= window_top * (1.0 + 1e-12) && std::isfinite(t.lnu[i])) {
                wx.push_back(t.lnr[i]);
                wy.push_back(t.lnu[i]);
            }
        }
        SolutionEvidence ev;
        if (wx.size() >= 8) {
            const odeflow::LineFit fit = odeflow::fit_line(wx, wy);
            ev.exponent = fit.slope;
            ev.exponent_residual = fit.rms;
        } else {
            ev.exponent = std::numeric_limits<double>::quiet_NaN();
            ev.exponent_residual = std::numeric_limits<double>::infinity();
        }
        ev.integral_ratio = decade_mass_ratio(t, opt.r_min, window_top);

        const Vote evote = std::isfinite(ev.exponent) && ev.exponent_residual < 0.5
                               ? exponent_vote(ev.exponent, opt)
                               : Vote::Abstain;
        const Vote ivote = integral_vote(ev.integral_ratio, opt);
        Vote combined;
        if (evote != Vote::Abstain && ivote != Vote::Abstain && evote != ivote) {
            combined = Vote::Abstain; // hard conflict of definite votes
            report.note = "exponent and integral votes conflict";
        } else if (evote != Vote::Abstain) {
            combined = evote;
        } else if (ivote != Vote::Abstain) {
            combined = ivote;
        } else {
            combined = Vote::Abstain;
            report.note = "both square-integrability votes abstain";
        }
        votes[sidx] = combined;
        report.solutions.push_back(ev);
    }

    report.wronskian_drift = wronskian_drift(tracks[0], tracks[1]);

    if (votes[0] == Vote::Abstain || votes[1] == Vote::Abstain) {
        report.verdict = Verdict::Inconclusive;
        if (report.note.empty()) report.note = "square-integrability vote abstained";
        return report;
    }
    if (votes[0] == Vote::Yes && votes[1] == Vote::Yes) {
        report.verdict = Verdict::LimitCircle;
        report.l2_count = 2;
    } else {
        // a generic non-integrable direction exists; exactly one solution
        // stays square integrable off the real axis
        report.verdict = Verdict::LimitPoint;
        report.l2_count = 1;
    }
    return report;
}

EndpointReport count_l2_solutions_at_infinity(const RadialProblem& problem,
                                              const OracleOptions& opt) {
    require_offaxis(problem);
    const odeflow::LinearOde ode = make_radial_ode(problem);
    odeflow::IntegrateOptions iopt;
    iopt.rel_tol = opt.rel_tol;

    const Trajectory outward =
        odeflow::integrate(ode, opt.r_mid, {1.0, 0.0}, {0.0, 0.0}, opt.r_max, iopt);
    const Trajectory inward =
        odeflow::integrate(ode, opt.r_max, {1.0, 0.0}, {0.0, 0.0}, opt.r_mid, iopt);

    const odeflow::GrowthReport g_out = odeflow::growth_monitor(outward);
    const odeflow::GrowthReport g_in = odeflow::growth_monitor(inward);

    EndpointReport report;
    SolutionEvidence ev_out, ev_in;
    ev_out.growth_rate = g_out.rate;
    ev_in.growth_rate = g_in.rate;
    report.solutions.push_back(ev_out);
    report.solutions.push_back(ev_in);
    report.wronskian_drift = wronskian_drift(ascending_track(outward), ascending_track(inward));

    constexpr double kRateSeparation = 0.05;
    const bool grew = g_out.cls == odeflow::GrowthClass::Growing && g_out.rate > kRateSeparation;
    const bool decayed =
        g_in.cls == odeflow::GrowthClass::Decaying && g_in.rate < -kRateSeparation;
    if (grew && decayed) {
        report.verdict = Verdict::LimitPoint;
        report.l2_count = 1; // the decaying direction, and only it
    } else {
        report.verdict = Verdict::Inconclusive;
        std::ostringstream note;
        note << "growth dichotomy unresolved: outward " << odeflow::to_string(g_out.cls)
             << " rate " << g_out.rate << ", inward " << odeflow::to_string(g_in.cls) << " rate "
             << g_in.rate;
        report.note = note.str();
    }
    return report;
}

HarmonicProbe numerical_harmonic_index(const RadialProblem& problem, const OracleOptions& opt) {
    HarmonicProbe probe;
    probe.nu_squared = problem.nu_squared;
    probe.zero = count_l2_solutions_at_zero(problem, opt);
    if (probe.zero.verdict == Verdict::Inconclusive) {
        probe.reason = probe.zero.note.empty() ? "zero endpoint inconclusive" : probe.zero.note;
        return probe;
    }
    probe.m0 = probe.zero.l2_count;
    probe.infinity = count_l2_solutions_at_infinity(problem, opt);
    if (probe.infinity.verdict == Verdict::Inconclusive) {
        probe.reason =
            probe.infinity.note.empty() ? "infinite endpoint inconclusive" : probe.infinity.note;
        return probe;
    }
    probe.m_inf = probe.infinity.l2_count;
    const double dz = probe.zero.wronskian_drift;
    const double di = probe.infinity.wronskian_drift;
    probe.wronskian_drift = std::max(std::isfinite(dz) ? dz : 0.0, std::isfinite(di) ? di : 0.0);
    probe.index = *probe.m0 + *probe.m_inf - 2;
    return probe;
}

OracleResult numerical_singularity_index(const model::Singularity& s, LambdaSign sign,
                                         const OracleOptions& opt) {
    OracleResult result;
    result.id = s.id;
    result.lambda = sign;
    const Complex lam = lambda_of(sign);

    bool conclusive = true;
    int total = 0;
    for (const auto& [ell, nu2] : calculus::window_couplings(s.alpha, s.p)) {
        HarmonicProbe probe = numerical_harmonic_index({nu2, s.q, lam}, opt);
        probe.ell = ell;
        if (std::isfinite(probe.wronskian_drift)) {
            result.max_wronskian_drift =
                std::max(result.max_wronskian_drift, probe.wronskian_drift);
        }
        if (probe.index) {
            total += *probe.index;
        } else {
            conclusive = false;
        }
        result.harmonics.push_back(std::move(probe));
    }
    if (conclusive) {
        result.total = total;
        const int closed = calculus::singularity_index(s).index;
        result.agreement = total == closed ? Agreement::Agree : Agreement::Disagree;
    } else {
        result.agreement = Agreement::NotRun;
    }
    return result;
}

} // namespace defind::weyl
