#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

#include "defind/odeflow.hpp"
#include "doctest.h"

using namespace defind::odeflow;

namespace {

constexpr double kPi = 3.141592653589793238462643;

LinearOde constant_coeff(Complex c) {
    LinearOde ode;
    ode.coeff = [c](double) { return c; };
    return ode;
}

double reconstructed_log_mag(const Sample& s) { return std::log(std::abs(s.u)) + s.log_scale; }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const OdeError& e) {
        return e.code();
    }
    FAIL("expected an integration error");
    return ErrorCode::IntegrationFailure;
}

Trajectory synthetic(const std::vector<double>& rs, const std::function<Complex(double)>& u) {
    Trajectory t;
    for (const double r : rs) t.samples.push_back({r, u(r), {0.0, 0.0}, 0.0});
    return t;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    }
    return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out;
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i) {
        out.push_back(std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (n - 1)));
    }
    return out;
}

} // namespace

TEST_CASE("zero coefficient keeps a constant solution constant") {
    const auto traj = integrate(constant_coeff({0.0, 0.0}), 1.0, {1.0, 0.0}, {0.0, 0.0}, 5.0);
    REQUIRE(traj.samples.size() >= 18);
    for (const auto& s : traj.samples) {
        CHECK(std::abs(s.u - Complex{1.0, 0.0}) < 1e-12);
        CHECK(std::abs(s.du) < 1e-12);
    }
    CHECK(traj.samples.front().r == 1.0);
    CHECK(traj.samples.back().r == 5.0);
}

TEST_CASE("exponential fixture hits rel_tol") {
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const auto traj = integrate(constant_coeff({1.0, 0.0}), 0.1, {1.0, 0.0}, {1.0, 0.0}, 1.1, opt);
    const double expected = std::exp(1.0);
    CHECK(std::abs(traj.final_u() - Complex{expected, 0.0}) < expected * 1e-10);
    CHECK(std::abs(traj.final_du() - Complex{expected, 0.0}) < expected * 1e-10);
}

TEST_CASE("cosine half-period fixture hits rel_tol") {
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const auto traj =
        integrate(constant_coeff({-1.0, 0.0}), 1.0, {1.0, 0.0}, {0.0, 0.0}, 1.0 + kPi, opt);
    CHECK(std::abs(traj.final_u() - Complex{-1.0, 0.0}) < 1e-10);
}

TEST_CASE("integration supports both directions") {
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    // u = exp(r - 0.1) swept backwards from its value at 1.1
    const double e1 = std::exp(1.0);
    const auto traj =
        integrate(constant_coeff({1.0, 0.0}), 1.1, {e1, 0.0}, {e1, 0.0}, 0.1, opt);
    CHECK(traj.samples.front().r == 1.1);
    CHECK(traj.samples.back().r == 0.1);
    CHECK(std::abs(traj.final_u() - Complex{1.0, 0.0}) < 1e-9);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].r < traj.samples[i - 1].r); // traversal order, descending
    }
}

TEST_CASE("log-radius sweep reproduces the linear solution over five decades") {
    const auto ode = LinearOde::from_structured({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    // nu^2 = 1/4 free case: c2 = nu^2 - 1/4 = 0 and u = r solves u'' = 0
    const auto traj = log_transform_integrate(ode, 0.1, {0.1, 0.0}, {1.0, 0.0}, 1e-6, opt);
    CHECK(traj.log_stepped);
    CHECK(std::abs(traj.final_u() - Complex{1e-6, 0.0}) < 1e-6 * 1e-10);
    CHECK(std::abs(traj.final_du() - Complex{1.0, 0.0}) < 1e-10);
    CHECK(traj.span_decades() == doctest::Approx(5.0));
    // samples are logarithmically placed: uniform gaps in ln r
    double gap_lo = 1e300, gap_hi = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double gap = std::log(traj.samples[i - 1].r / traj.samples[i].r);
        gap_lo = std::min(gap_lo, gap);
        gap_hi = std::max(gap_hi, gap);
    }
    CHECK(gap_hi / gap_lo < 1.0 + 1e-9);
    CHECK(traj.samples.size() >= 160); // 32 per decade over 5 decades
}

TEST_CASE("log-radius sweep tracks both branches of the pure inverse-square equation") {
    // c2 = 2 gives exponents 2 and -1; each branch is swept in its stable direction
    const auto ode = LinearOde::from_structured({{2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-12;

    const auto growing =
        log_transform_integrate(ode, 1e-6, {1e-12, 0.0}, {2e-6, 0.0}, 1e-2, opt);
    std::vector<double> lx, ly;
    for (const auto& s : growing.samples) {
        lx.push_back(std::log(s.r));
        ly.push_back(reconstructed_log_mag(s));
    }
    CHECK(std::abs(fit_line(lx, ly).slope - 2.0) < 0.01);

    const auto decaying =
        log_transform_integrate(ode, 1e-2, {100.0, 0.0}, {-10000.0, 0.0}, 1e-6, opt);
    lx.clear();
    ly.clear();
    for (const auto& s : decaying.samples) {
        lx.push_back(std::log(s.r));
        ly.push_back(reconstructed_log_mag(s));
    }
    CHECK(std::abs(fit_line(lx, ly).slope + 1.0) < 0.01);
}

TEST_CASE("growth monitor recognizes the exponential dichotomy") {
    const double kappa = 1.0 / std::sqrt(2.0);
    const auto rs = linspace(1.0, 40.0, 240);

    const auto grow = synthetic(rs, [&](double r) {
        return std::exp(kappa * r) * Complex{std::cos(kappa * r), std::sin(kappa * r)};
    });
    auto report = growth_monitor(grow);
    CHECK(report.cls == GrowthClass::Growing);
    CHECK(std::abs(report.rate - kappa) < 0.01);

    const auto decay = synthetic(rs, [&](double r) {
        return std::exp(-kappa * r) * Complex{std::cos(kappa * r), -std::sin(kappa * r)};
    });
    report = growth_monitor(decay);
    CHECK(report.cls == GrowthClass::Decaying);
    CHECK(std::abs(report.rate + kappa) < 0.01);
}

TEST_CASE("growth monitor recognizes power laws on decade spans") {
    const auto rs = logspace(1e-5, 1e-1, 200);
    const auto traj = synthetic(rs, [](double r) { return Complex{r * r, 0.0}; });
    const auto report = growth_monitor(traj);
    CHECK(report.cls == GrowthClass::PowerLaw);
    CHECK(std::abs(report.rate - 2.0) < 0.01);
}

TEST_CASE("growth monitor abstains when the models tie") {
    const auto rs = linspace(1.0, 40.0, 120);
    const auto traj = synthetic(rs, [](double) { return Complex{1.0, 0.0}; });
    CHECK(growth_monitor(traj).cls == GrowthClass::Unresolved);
}

TEST_CASE("growth monitor rejects degenerate sample sets") {
    const auto few = synthetic({1.0, 2.0, 3.0}, [](double) { return Complex{1.0, 0.0}; });
    CHECK(code_of([&] { (void)growth_monitor(few); }) == ErrorCode::DegenerateSamples);

    const auto narrow =
        synthetic(linspace(1.0, 3.0, 30), [](double r) { return Complex{r, 0.0}; });
    CHECK(code_of([&] { (void)growth_monitor(narrow); }) == ErrorCode::DegenerateSamples);
}

TEST_CASE("renormalization keeps the reconstructed magnitude continuous") {
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const auto traj = integrate(constant_coeff({1.0, 0.0}), 1.0, {1.0, 0.0}, {1.0, 0.0}, 300.0, opt);
    REQUIRE(traj.renorms.size() >= 1);
    // u = exp(r - 1): stored values shrink at each ledger event, the
    // reconstruction does not
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double dlog =
            reconstructed_log_mag(traj.samples[i]) - reconstructed_log_mag(traj.samples[i - 1]);
        const double dr = traj.samples[i].r - traj.samples[i - 1].r;
        CHECK(std::abs(dlog - dr) < 1e-9 * std::max(1.0, dr));
    }
    // stored magnitudes stay near the ledger threshold instead of overflowing;
    // a sample emitted inside the triggering step may overshoot by one step's growth
    for (const auto& s : traj.samples) CHECK(std::abs(s.u) <= 1e110);

    const auto report = growth_monitor(traj);
    CHECK(report.cls == GrowthClass::Growing);
    CHECK(std::abs(report.rate - 1.0) < 0.01);
}

TEST_CASE("rescaling a seed never changes a growth verdict") {
    const auto ode = constant_coeff({0.0, 1.0}); // lambda = -i flavored curvature
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const auto base = growth_monitor(integrate(ode, 1.0, {1.0, 0.0}, {0.0, 0.0}, 40.0, opt));
    const auto scaled =
        growth_monitor(integrate(ode, 1.0, {1e120, 0.0}, {0.0, 0.0}, 40.0, opt));
    CHECK(base.cls == scaled.cls);
    CHECK(base.rate == doctest::Approx(scaled.rate).epsilon(1e-6));
}

TEST_CASE("superposition holds to ten times the tolerance") {
    const auto ode = LinearOde::from_structured({{0.3, 0.1}, {-0.5, 0.2}, {0.0, 1.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const Complex a{0.7, -1.3}, b{-0.2, 2.1};
    const Complex u1{1.0, 0.0}, du1{0.0, 0.5};
    const Complex u2{0.0, 1.0}, du2{1.0, 0.0};

    const auto t1 = integrate(ode, 0.7, u1, du1, 2.3, opt);
    const auto t2 = integrate(ode, 0.7, u2, du2, 2.3, opt);
    const auto t12 = integrate(ode, 0.7, a * u1 + b * u2, a * du1 + b * du2, 2.3, opt);

    const Complex expect_u = a * t1.final_u() + b * t2.final_u();
    const Complex expect_du = a * t1.final_du() + b * t2.final_du();
    const double scale = std::abs(expect_u) + std::abs(expect_du) + 1.0;
    CHECK(std::abs(t12.final_u() - expect_u) < 10.0 * opt.rel_tol * scale);
    CHECK(std::abs(t12.final_du() - expect_du) < 10.0 * opt.rel_tol * scale);
}

TEST_CASE("a round trip returns the seed to a hundred times the tolerance") {
    const auto ode = LinearOde::from_structured({{1.2, 0.0}, {0.5, 0.0}, {0.0, -1.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const Complex u0{0.8, -0.1}, du0{-0.3, 1.1};
    const auto there = integrate(ode, 0.7, u0, du0, 2.9, opt);
    const auto back = integrate(ode, 2.9, there.final_u(), there.final_du(), 0.7, opt);
    const double scale = std::abs(u0) + std::abs(du0);
    CHECK(std::abs(back.final_u() - u0) < 100.0 * opt.rel_tol * scale);
    CHECK(std::abs(back.final_du() - du0) < 100.0 * opt.rel_tol * scale);
}

TEST_CASE("log-radius stepping agrees with direct integration on overlap") {
    const auto ode = LinearOde::from_structured({{0.05, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const Complex u0{1.0, 0.2}, du0{0.4, -1.0};
    const auto direct = integrate(ode, 1e-1, u0, du0, 1e-3, opt);
    const auto logged = log_transform_integrate(ode, 1e-1, u0, du0, 1e-3, opt);
    const double scale = std::abs(direct.final_u()) + std::abs(direct.final_du());
    CHECK(std::abs(direct.final_u() - logged.final_u()) < 10.0 * opt.rel_tol * scale);
    CHECK(std::abs(direct.final_du() - logged.final_du()) < 10.0 * opt.rel_tol * scale);
}

TEST_CASE("the Wronskian of two solutions stays constant") {
    const auto ode = LinearOde::from_structured({{1.75, 0.0}, {1.0, 0.0}, {0.0, -1.0}});
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    const auto t1 = integrate(ode, 0.5, {1.0, 0.0}, {0.0, 0.0}, 2.5, opt);
    const auto t2 = integrate(ode, 0.5, {0.0, 0.0}, {1.0, 0.0}, 2.5, opt);
    REQUIRE(t1.samples.size() == t2.samples.size());
    for (std::size_t i = 0; i < t1.samples.size(); ++i) {
        REQUIRE(t1.samples[i].r == t2.samples[i].r);
        const auto& a = t1.samples[i];
        const auto& b = t2.samples[i];
        const Complex w =
            (a.u * b.du - b.u * a.du) * std::exp(a.log_scale + b.log_scale);
        CHECK(std::abs(w - Complex{1.0, 0.0}) < 100.0 * opt.rel_tol);
    }
}

TEST_CASE("caller-provided sample points are honored exactly") {
    IntegrateOptions opt;
    opt.rel_tol = 1e-10;
    opt.sample_points = std::vector<double>{0.25, 0.5, 0.75};
    const auto traj = integrate(constant_coeff({0.0, 0.0}), 0.1, {1.0, 0.0}, {0.0, 0.0}, 1.0, opt);
    REQUIRE(traj.samples.size() == 5);
    CHECK(traj.samples[0].r == 0.1);
    CHECK(traj.samples[1].r == 0.25);
    CHECK(traj.samples[2].r == 0.5);
    CHECK(traj.samples[3].r == 0.75);
    CHECK(traj.samples[4].r == 1.0);

    opt.sample_points = std::vector<double>{0.5, 0.25};
    CHECK(code_of([&] {
              (void)integrate(constant_coeff({0.0, 0.0}), 0.1, {1.0, 0.0}, {0.0, 0.0}, 1.0, opt);
          }) == ErrorCode::DomainViolation);
}

TEST_CASE("domain and tolerance violations are rejected") {
    LinearOde ode = constant_coeff({1.0, 0.0});
    ode.domain_lo = 0.1;
    ode.domain_hi = 10.0;
    CHECK(code_of([&] { (void)integrate(ode, 0.05, {1.0, 0.0}, {0.0, 0.0}, 1.0); }) ==
          ErrorCode::DomainViolation);
    CHECK(code_of([&] { (void)integrate(ode, 1.0, {1.0, 0.0}, {0.0, 0.0}, 1.0); }) ==
          ErrorCode::DomainViolation);

    IntegrateOptions loose;
    loose.rel_tol = 1e-2;
    CHECK(code_of([&] { (void)integrate(ode, 0.5, {1.0, 0.0}, {0.0, 0.0}, 1.0, loose); }) ==
          ErrorCode::DomainViolation);

    // direct coefficient without declared structure cannot log-step
    CHECK(code_of([&] { (void)log_transform_integrate(ode, 1.0, {1.0, 0.0}, {0.0, 0.0}, 0.5); }) ==
          ErrorCode::DomainViolation);
}

TEST_CASE("a pole inside the range collapses the step size") {
    LinearOde ode;
    ode.coeff = [](double r) {
        const double d = r - 2.0;
        return Complex{1.0 / (d * d * d * d), 0.0};
    };
    const auto code = code_of([&] { (void)integrate(ode, 1.0, {1.0, 0.0}, {0.1, 0.0}, 3.0); });
    const bool collapse_or_budget =
        code == ErrorCode::StepCollapse || code == ErrorCode::IntegrationFailure;
    CHECK(collapse_or_budget);
}

TEST_CASE("trajectory dump is plot-ready") {
    const auto traj = integrate(constant_coeff({0.0, 0.0}), 1.0, {1.0, 0.0}, {0.0, 0.0}, 2.0);
    std::ostringstream out;
    dump_csv(traj, out);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "r,re_u,im_u,re_du,im_du,scale_exponent");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == traj.samples.size());
}
