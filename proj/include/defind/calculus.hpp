#pragma once

#include <string_view>
#include <vector>

#include "defind/model.hpp"

namespace defind::calculus {

/// Flux reduced to [0, 1). is_integer snaps within 1e-12 of an integer,
/// in which case fractional is exactly 0.
struct ReducedFlux {
    double fractional = 0.0;
    bool is_integer = false;
};

[[nodiscard]] ReducedFlux reduced_flux(double alpha);

/// Effective inverse-square coupling of angular sector ell: (ell + alpha)^2 + p.
[[nodiscard]] double radial_coupling(int ell, double alpha, double p);

struct HarmonicCoupling {
    int ell = 0;
    double nu_squared = 0.0;
};

/// Contribution of one angular sector to the deficiency index: 1 when the
/// coupling lies in [0, 1), else 0. The Coulomb strength never enters.
[[nodiscard]] int classify_harmonic(double nu_squared, double q);

/// Angular sectors that can satisfy (ell + alpha)^2 + p < 1, padded by a
/// two-sector safety margin on each side.
struct HarmonicWindow {
    int lo = 0;
    int hi = 0;
};

[[nodiscard]] HarmonicWindow scan_window(double alpha);

/// Couplings over the scan window, ascending in ell.
[[nodiscard]] std::vector<HarmonicCoupling> window_couplings(double alpha, double p);

/// Sectors with coupling < 1, ascending. At most two sectors ever qualify.
[[nodiscard]] std::vector<int> contributing_harmonics(double alpha, double p);

enum class SingularityClass { J2, J1, Y, PointInteraction };

[[nodiscard]] std::string_view to_string(SingularityClass c);

struct SingularityIndex {
    int index = 0; ///< 0, 1 or 2
    SingularityClass cls = SingularityClass::Y;
    std::vector<int> harmonics; ///< the contributing sectors
};

/// Per-point deficiency index with its classification. The class is fully
/// determined by the reduced flux and p; the index always equals the number
/// of contributing sectors.
[[nodiscard]] SingularityIndex singularity_index(const model::Singularity& s);

struct PerSingularity {
    std::string id;
    int index = 0;
    SingularityClass cls = SingularityClass::Y;
    std::vector<int> harmonics;
};

struct DeficiencyReport {
    model::IndexCount total;
    model::IndexCount background_index;
    std::vector<PerSingularity> per_singularity;
    bool nplus_equals_nminus = true; ///< the operator commutes with conjugation
};

/// Additive total over the configuration: background plus per-point indices.
[[nodiscard]] DeficiencyReport total_index(const model::Configuration& config);

} // namespace defind::calculus
