#include "defind/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace defind::calculus {

namespace {

constexpr double kIntegerSnap = 1e-12;

// Fluxes inside the snap tolerance behave as exactly integral everywhere in
// this module, so every derived quantity sees one consistent value.
double effective_alpha(double alpha) {
    return reduced_flux(alpha).is_integer ? std::round(alpha) : alpha;
}

} // namespace

ReducedFlux reduced_flux(double alpha) {
    double frac = alpha - std::floor(alpha);
    if (frac >= 1.0) frac = 0.0; // floor artifact for tiny negative alpha
    const bool integral = frac <= kIntegerSnap || frac >= 1.0 - kIntegerSnap;
    if (integral) frac = 0.0;
    return {frac, integral};
}

double radial_coupling(int ell, double alpha, double p) {
    const double shifted = static_cast<double>(ell) + alpha;
    return shifted * shifted + p;
}

int classify_harmonic(double nu_squared, double q) {
    static_cast<void>(q); // the index of a sector never depends on the Coulomb term
    return nu_squared < 1.0 ? 1 : 0;
}

HarmonicWindow scan_window(double alpha) {
    const int lo = static_cast<int>(std::ceil(-alpha - 1.0));
    const int hi = static_cast<int>(std::floor(-alpha + 1.0));
    return {lo - 2, hi + 2};
}

std::vector<HarmonicCoupling> window_couplings(double alpha, double p) {
    const double a = effective_alpha(alpha);
    const auto [lo, hi] = scan_window(a);
    std::vector<HarmonicCoupling> out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (int ell = lo; ell <= hi; ++ell) out.push_back({ell, radial_coupling(ell, a, p)});
    return out;
}

std::vector<int> contributing_harmonics(double alpha, double p) {
    std::vector<int> out;
    for (const auto& [ell, nu2] : window_couplings(alpha, p)) {
        if (classify_harmonic(nu2, 0.0) == 1) out.push_back(ell);
    }
    return out; // window iteration is ascending already
}

std::string_view to_string(SingularityClass c) {
    switch (c) {
        case SingularityClass::J2: return "J2";
        case SingularityClass::J1: return "J1";
        case SingularityClass::Y: return "Y";
        case SingularityClass::PointInteraction: return "POINT_INTERACTION";
    }
    return "?";
}

SingularityIndex singularity_index(const model::Singularity& s) {
    SingularityIndex out;
    out.harmonics = contributing_harmonics(s.alpha, s.p);
    out.index = static_cast<int>(out.harmonics.size());

    // Only the sectors with |ell + alpha| < 1 can fall below unit coupling,
    // so the class below always matches the sector count above.
    const ReducedFlux flux = reduced_flux(s.alpha);
    if (flux.is_integer && s.p == 0.0) {
        out.cls = SingularityClass::PointInteraction;
    } else {
        const double a = flux.fractional;
        const double low = std::min(a * a, (a - 1.0) * (a - 1.0));
        const double high = std::max(a * a, (a - 1.0) * (a - 1.0));
        if (high + s.p < 1.0) {
            out.cls = SingularityClass::J2;
        } else if (low + s.p < 1.0) {
            out.cls = SingularityClass::J1;
        } else {
            out.cls = SingularityClass::Y;
        }
    }
    return out;
}

DeficiencyReport total_index(const model::Configuration& config) {
    DeficiencyReport report;
    report.background_index = config.background_index;
    model::IndexCount total = config.background_index;
    for (const auto& s : config.singularities) {
        SingularityIndex idx = singularity_index(s);
        total += model::IndexCount::finite(static_cast<std::uint64_t>(idx.index));
        report.per_singularity.push_back(
            {s.id, idx.index, idx.cls, std::move(idx.harmonics)});
    }
    report.total = total;
    return report;
}

} // namespace defind::calculus
