#include "defind/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "defind/calculus.hpp"
#include "defind/json_io.hpp"
#include "defind/model.hpp"

namespace defind::cli {

namespace {

std::string num_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string count_str(model::IndexCount c) {
    return c.is_infinite() ? std::string("infinite") : std::to_string(c.value());
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) return false;
    f << content;
    f.flush();
    return static_cast<bool>(f);
}

/// Loads, parses and validates the input configuration. On failure reports
/// to err and sets code; the returned optional is empty.
std::optional<model::Configuration> load_config(const RunSpec& spec, std::ostream& err,
                                                int& code) {
    code = kOk;
    if (spec.input_path.empty()) {
        err << "error: no input file given\n";
        code = kIoFailure;
        return std::nullopt;
    }
    std::ifstream in(spec.input_path, std::ios::binary);
    if (!in) {
        err << "error: cannot open '" << spec.input_path << "'\n";
        code = kIoFailure;
        return std::nullopt;
    }
    model::RawConfig raw;
    try {
        raw = json_io::parse_config(in);
    } catch (const json_io::ParseError& e) {
        err << "error: " << spec.input_path << ": " << e.what() << "\n";
        code = kIoFailure;
        return std::nullopt;
    }
    model::BuildOutcome outcome = model::build_configuration(raw);
    if (!outcome.report.ok) {
        err << "error: configuration invalid\n";
        for (const auto& v : outcome.report.violations) {
            err << "  [" << model::to_string(v.rule) << "] " << v.code << ": " << v.message
                << "\n";
        }
        code = kValidationFailure;
        return std::nullopt;
    }
    return std::move(outcome.config);
}

int normalized_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Index-keyed parallel map; work items land in caller-owned slots, so the
/// aggregation order never depends on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const int workers =
        std::max(1, std::min(normalized_jobs(jobs), static_cast<int>(std::min<std::size_t>(
                                                        n, std::numeric_limits<int>::max()))));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void print_report_table(const model::Configuration& config,
                        const calculus::DeficiencyReport& report, std::ostream& out) {
    out << std::left << std::setw(14) << "id" << std::setw(12) << "alpha" << std::setw(12)
        << "p" << std::setw(12) << "q" << std::setw(19) << "class" << "index\n";
    for (std::size_t i = 0; i < report.per_singularity.size(); ++i) {
        const auto& row = report.per_singularity[i];
        const auto& s = config.singularities[i];
        out << std::left << std::setw(14) << row.id << std::setw(12) << num_str(s.alpha)
            << std::setw(12) << num_str(s.p) << std::setw(12) << num_str(s.q) << std::setw(19)
            << calculus::to_string(row.cls) << row.index << "\n";
    }
    out << "n0 = " << count_str(report.background_index) << "\n";
    out << "total = " << count_str(report.total) << "\n";
}

bool boundary_only_inconclusive(const weyl::OracleResult& result) {
    bool saw_inconclusive = false;
    for (const auto& h : result.harmonics) {
        if (h.index) continue;
        saw_inconclusive = true;
        if (h.reason.find("boundary band") == std::string::npos) return false;
    }
    return saw_inconclusive;
}

struct GridRow {
    double alpha = 0.0;
    double p = 0.0;
    double q = 0.0;
    std::string closed_form;
    std::string plus;
    std::string minus;
    std::string agree;
};

GridRow evaluate_grid_point(double alpha, double p, double q,
                            const weyl::OracleOptions& options) {
    GridRow row;
    row.alpha = alpha;
    row.p = p;
    row.q = q;
    if (p == 0.0 && q < 0.0) {
        row.closed_form = row.plus = row.minus = "-";
        row.agree = "skipped";
        return row;
    }
    const model::Singularity s{"grid", {0.0, 0.0}, alpha, p, q};
    const calculus::SingularityIndex closed = calculus::singularity_index(s);
    row.closed_form = std::to_string(closed.index);

    // mirror of the oracle's band policy, checked upfront so boundary rows
    // skip the integration work they could only report as inconclusive
    for (const auto& hc : calculus::window_couplings(alpha, p)) {
        const double d = std::abs(hc.nu_squared - 1.0);
        if (d > 1e-12 && d < options.boundary_band) {
            row.plus = row.minus = "inconclusive";
            row.agree = "boundary";
            return row;
        }
    }

    const weyl::OracleResult rp =
        weyl::numerical_singularity_index(s, weyl::LambdaSign::PlusI, options);
    const weyl::OracleResult rm =
        weyl::numerical_singularity_index(s, weyl::LambdaSign::MinusI, options);
    row.plus = rp.total ? std::to_string(*rp.total) : "inconclusive";
    row.minus = rm.total ? std::to_string(*rm.total) : "inconclusive";
    if (rp.total && rm.total) {
        const bool ok = *rp.total == closed.index && *rm.total == closed.index;
        row.agree = ok ? "true" : "false";
    } else {
        row.agree = "inconclusive";
    }
    return row;
}

} // namespace

std::vector<double> AxisSpec::values() const {
    std::vector<double> out;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(step > 0.0)) return out;
    const double slack = step * 1e-9;
    for (std::size_t i = 0; i < 1000000; ++i) {
        const double v = lo + static_cast<double>(i) * step;
        if (v > hi + slack) break;
        out.push_back(v);
    }
    return out;
}

std::optional<AxisSpec> parse_axis(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ':')) parts.push_back(token);
    const auto parse_num = [](const std::string& t, double& v) {
        try {
            std::size_t pos = 0;
            v = std::stod(t, &pos);
            return pos == t.size() && std::isfinite(v);
        } catch (...) {
            return false;
        }
    };
    AxisSpec axis;
    if (parts.size() == 1) {
        double v = 0.0;
        if (!parse_num(parts[0], v)) return std::nullopt;
        axis.lo = axis.hi = v;
        axis.step = 1.0;
        return axis;
    }
    if (parts.size() != 3) return std::nullopt;
    if (!parse_num(parts[0], axis.lo) || !parse_num(parts[1], axis.hi) ||
        !parse_num(parts[2], axis.step)) {
        return std::nullopt;
    }
    if (!(axis.step > 0.0)) return std::nullopt;
    return axis;
}

int run_classify(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    int code = kOk;
    const auto config = load_config(spec, err, code);
    if (!config) return code;
    const calculus::DeficiencyReport report = calculus::total_index(*config);
    const std::string json = json_io::report_json(report, !spec.no_timestamp);
    if (!spec.output_path.empty() && !write_file(spec.output_path, json)) {
        err << "error: cannot write '" << spec.output_path << "'\n";
        return kIoFailure;
    }
    if (spec.format == "json") {
        out << json;
    } else {
        print_report_table(*config, report, out);
    }
    return kOk;
}

int run_verify(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    int code = kOk;
    const auto config = load_config(spec, err, code);
    if (!config) return code;

    const auto& singularities = config->singularities;
    std::vector<weyl::OracleResult> results(singularities.size() * 2);
    parallel_for(results.size(), spec.jobs, [&](std::size_t k) {
        const auto& s = singularities[k / 2];
        const auto sign = k % 2 == 0 ? weyl::LambdaSign::PlusI : weyl::LambdaSign::MinusI;
        results[k] = weyl::numerical_singularity_index(s, sign, spec.oracle);
    });

    int disagreements = 0;
    int warnings = 0;
    std::ostringstream table;
    table << std::left << std::setw(14) << "id" << std::setw(8) << "lambda" << std::setw(14)
          << "total" << "agreement\n";
    for (const auto& r : results) {
        std::string status;
        switch (r.agreement) {
            case weyl::Agreement::Agree: status = "agree"; break;
            case weyl::Agreement::Disagree:
                status = "DISAGREE";
                ++disagreements;
                err << "error: oracle disagrees with the closed form: id=" << r.id
                    << " lambda=" << weyl::to_string(r.lambda) << "\n";
                break;
            case weyl::Agreement::NotRun:
                if (boundary_only_inconclusive(r)) {
                    status = "boundary-inconclusive";
                    err << "warning: boundary-inconclusive: id=" << r.id
                        << " lambda=" << weyl::to_string(r.lambda) << "\n";
                } else {
                    status = "inconclusive";
                    err << "warning: inconclusive: id=" << r.id
                        << " lambda=" << weyl::to_string(r.lambda) << "\n";
                }
                ++warnings;
                break;
        }
        table << std::left << std::setw(14) << r.id << std::setw(8) << weyl::to_string(r.lambda)
              << std::setw(14) << (r.total ? std::to_string(*r.total) : std::string("-"))
              << status << "\n";
    }
    table << "disagreements = " << disagreements << ", warnings = " << warnings << "\n";

    const std::string json = json_io::verify_json(results, !spec.no_timestamp);
    if (!spec.output_path.empty() && !write_file(spec.output_path, json)) {
        err << "error: cannot write '" << spec.output_path << "'\n";
        return kIoFailure;
    }
    if (spec.format == "json") {
        out << json;
    } else {
        out << table.str();
    }
    return disagreements > 0 ? kDisagreement : kOk;
}

int run_grid(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    const std::vector<double> alphas = spec.alpha_axis.values();
    const std::vector<double> ps = spec.p_axis.values();
    const std::vector<double>& qs = spec.q_values;
    if (alphas.empty() || ps.empty() || qs.empty()) {
        err << "error: empty grid range\n";
        return kValidationFailure;
    }

    std::vector<std::tuple<double, double, double>> points;
    points.reserve(alphas.size() * ps.size() * qs.size());
    for (const double a : alphas) {
        for (const double p : ps) {
            for (const double q : qs) points.emplace_back(a, p, q);
        }
    }

    std::vector<GridRow> rows(points.size());
    parallel_for(points.size(), spec.jobs, [&](std::size_t i) {
        const auto& [a, p, q] = points[i];
        rows[i] = evaluate_grid_point(a, p, q, spec.oracle);
    });

    std::ostringstream csv;
    csv << "alpha,p,q,closed_form,oracle_plus,oracle_minus,agree\n";
    int disagreements = 0;
    int inconclusive = 0;
    for (const auto& row : rows) {
        csv << num_str(row.alpha) << ',' << num_str(row.p) << ',' << num_str(row.q) << ','
            << row.closed_form << ',' << row.plus << ',' << row.minus << ',' << row.agree
            << "\n";
        if (row.agree == "false") ++disagreements;
        if (row.agree == "inconclusive") ++inconclusive;
    }

    if (!spec.output_path.empty()) {
        if (!write_file(spec.output_path, csv.str())) {
            err << "error: cannot write '" << spec.output_path << "'\n";
            return kIoFailure;
        }
        out << rows.size() << " rows, " << disagreements << " disagreements\n";
    } else {
        out << csv.str();
    }
    if (inconclusive > 0) {
        err << "warning: " << inconclusive << " grid rows inconclusive outside the boundary band\n";
    }
    return disagreements > 0 ? kDisagreement : kOk;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        switch (spec.command) {
            case Command::Classify: return run_classify(spec, out, err);
            case Command::Verify: return run_verify(spec, out, err);
            case Command::Grid: return run_grid(spec, out, err);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kIoFailure;
    }
    return kIoFailure;
}

} // namespace defind::cli
