#include "defind/json_io.hpp"

#include <ctime>
#include <istream>
#include <iterator>
#include <utility>

#include "json.hpp"

namespace defind::json_io {

namespace {

using njson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) { throw ParseError(what); }

double number_field(const njson& obj, const char* key, bool required, double fallback) {
    if (!obj.contains(key)) {
        if (required) fail(std::string("missing required field '") + key + "'");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::string timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

njson count_json(model::IndexCount c) {
    if (c.is_infinite()) return "infinite";
    return c.value();
}

} // namespace

model::RawConfig parse_config_text(const std::string& text) {
    njson root;
    try {
        root = njson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(e.what());
    }
    if (!root.is_object()) fail("top-level value must be an object");

    model::RawConfig raw;
    if (root.contains("background_index")) {
        const auto& b = root.at("background_index");
        if (b.is_string()) {
            if (b.get<std::string>() != "infinite") {
                fail("background_index must be an integer or \"infinite\"");
            }
            raw.background_infinite = true;
        } else if (b.is_number_integer()) {
            raw.background_index = b.get<std::int64_t>();
        } else {
            fail("background_index must be an integer or \"infinite\"");
        }
    }

    if (!root.contains("singularities")) fail("missing required field 'singularities'");
    const auto& arr = root.at("singularities");
    if (!arr.is_array()) fail("'singularities' must be an array");
    for (const auto& entry : arr) {
        if (!entry.is_object()) fail("singularity entries must be objects");
        model::RawSingularity s;
        if (!entry.contains("id") || !entry.at("id").is_string()) {
            fail("singularity field 'id' must be a string");
        }
        s.id = entry.at("id").get<std::string>();
        s.x = number_field(entry, "x", true, 0.0);
        s.y = number_field(entry, "y", true, 0.0);
        s.alpha = number_field(entry, "alpha", true, 0.0);
        s.p = number_field(entry, "p", false, 0.0);
        s.q = number_field(entry, "q", false, 0.0);
        raw.singularities.push_back(std::move(s));
    }
    return raw;
}

model::RawConfig parse_config(std::istream& in) {
    std::string text(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    if (in.bad()) fail("failed to read configuration stream");
    return parse_config_text(text);
}

std::string report_json(const calculus::DeficiencyReport& report, bool with_timestamp) {
    njson j;
    j["total"] = count_json(report.total);
    j["background_index"] = count_json(report.background_index);
    njson per = njson::array();
    for (const auto& s : report.per_singularity) {
        njson row;
        row["id"] = s.id;
        row["index"] = s.index;
        row["class"] = std::string(calculus::to_string(s.cls));
        row["harmonics"] = s.harmonics;
        per.push_back(std::move(row));
    }
    j["per_singularity"] = std::move(per);
    j["nplus_equals_nminus"] = report.nplus_equals_nminus;
    if (with_timestamp) j["generated_at"] = timestamp_now();
    return j.dump(2) + "\n";
}

namespace {

njson oracle_node(const weyl::OracleResult& result) {
    njson j;
    j["id"] = result.id;
    j["lambda"] = std::string(weyl::to_string(result.lambda));
    njson harmonics = njson::array();
    for (const auto& h : result.harmonics) {
        njson row;
        row["ell"] = h.ell;
        if (h.m0) row["m0"] = *h.m0;
        if (h.m_inf) row["minf"] = *h.m_inf;
        if (h.index) {
            row["index"] = *h.index;
        } else {
            row["index"] = "inconclusive";
            if (!h.reason.empty()) row["reason"] = h.reason;
        }
        harmonics.push_back(std::move(row));
    }
    j["harmonics"] = std::move(harmonics);
    if (result.total) {
        j["total"] = *result.total;
    } else {
        j["total"] = "inconclusive";
    }
    switch (result.agreement) {
        case weyl::Agreement::Agree: j["agreement"] = true; break;
        case weyl::Agreement::Disagree: j["agreement"] = false; break;
        case weyl::Agreement::NotRun: j["agreement"] = "not_run"; break;
    }
    return j;
}

} // namespace

std::string oracle_json(const weyl::OracleResult& result, bool with_timestamp) {
    njson j = oracle_node(result);
    if (with_timestamp) j["generated_at"] = timestamp_now();
    return j.dump(2) + "\n";
}

std::string verify_json(std::span<const weyl::OracleResult> results, bool with_timestamp) {
    njson j;
    njson arr = njson::array();
    for (const auto& r : results) arr.push_back(oracle_node(r));
    j["results"] = std::move(arr);
    if (with_timestamp) j["generated_at"] = timestamp_now();
    return j.dump(2) + "\n";
}

std::string validation_json(const model::ValidationReport& report) {
    njson j;
    j["ok"] = report.ok;
    njson violations = njson::array();
    for (const auto& v : report.violations) {
        njson row;
        row["rule"] = std::string(model::to_string(v.rule));
        row["code"] = v.code;
        row["message"] = v.message;
        violations.push_back(std::move(row));
    }
    j["violations"] = std::move(violations);
    j["cutoff"] = njson{{"feasible", report.cutoff.feasible}, {"delta", report.cutoff.delta}};
    return j.dump(2) + "\n";
}

} // namespace defind::json_io
