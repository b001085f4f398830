#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "etchprobe/analysis.hpp"
#include "etchprobe/calibration.hpp"
#include "etchprobe/common.hpp"
#include "etchprobe/config.hpp"
#include "etchprobe/curve.hpp"

namespace etchprobe {

namespace detail {

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& filename) {
    std::ofstream out(filename);
    if (!out)
        throw ConfigError("cannot open '" + filename + "' for writing");
    return out;
}

inline double parse_number(const std::string& field, const std::string& where) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: '" + field + "'");
    }
    while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\r'))
        ++pos;
    if (pos != field.size())
        throw ConfigError(where + ": trailing junk in number: '" + field + "'");
    return v;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r')
        s.pop_back();
    return s;
}

} // namespace detail

inline const char* curve_unit(CurveKind k) { return k == CurveKind::temperature ? "K" : "V"; }

/// Curve file: `# etchprobe-curve v1 kind=<kind> unit=<K|V>`, a `time_s,value`
/// header, then one row per sample with 17 significant digits.
inline void write_curve(const std::string& filename, const TransientCurve& curve) {
    curve.validate();
    auto out = detail::open_out(filename);
    out << "# etchprobe-curve v1 kind=" << curve_kind_name(curve.kind)
        << " unit=" << curve_unit(curve.kind) << "\n";
    out << "time_s,value\n";
    for (const auto& s : curve.samples)
        out << detail::fmt17(s.t) << ',' << detail::fmt17(s.value) << "\n";
    if (!out)
        throw ConfigError("write failed for '" + filename + "'");
}

inline TransientCurve read_curve(const std::string& filename) {
    std::ifstream in(filename);
    if (!in)
        throw ConfigError("cannot open curve file '" + filename + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(filename + ": empty file");
    line = detail::strip_cr(line);

    const std::string magic = "# etchprobe-curve v1 ";
    if (line.rfind(magic, 0) != 0)
        throw ConfigError(filename + ":1: not an etchprobe curve file");
    TransientCurve curve;
    std::string unit;
    {
        std::istringstream ss(line.substr(magic.size()));
        std::string tok;
        bool have_kind = false;
        while (ss >> tok) {
            if (tok.rfind("kind=", 0) == 0) {
                curve.kind = curve_kind_from_name(tok.substr(5));
                have_kind = true;
            } else if (tok.rfind("unit=", 0) == 0) {
                unit = tok.substr(5);
            } else {
                throw ConfigError(filename + ":1: unknown header token '" + tok + "'");
            }
        }
        if (!have_kind || unit.empty())
            throw ConfigError(filename + ":1: header needs kind= and unit=");
        if (unit != curve_unit(curve.kind))
            throw ConfigError(filename + ":1: unit '" + unit + "' does not match kind");
    }

    if (!std::getline(in, line) || detail::strip_cr(line) != "time_s,value")
        throw ConfigError(filename + ":2: expected column header 'time_s,value'");

    std::size_t lineno = 2;
    double prev_t = 0.0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty())
            continue;
        const std::string where = filename + ":" + std::to_string(lineno);
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(where + ": expected 'time,value'");
        const double t = detail::parse_number(line.substr(0, comma), where);
        const double v = detail::parse_number(line.substr(comma + 1), where);
        if (!(t > prev_t))
            throw ConfigError(where + ": times must be positive and strictly increasing");
        prev_t = t;
        curve.samples.push_back({t, v});
    }
    curve.validate();
    return curve;
}

/// Calibration sweep: `# current_A=<value>` then `temperature_K,voltage_V` rows.
inline void write_calibration_csv(const std::string& filename,
                                  const std::vector<CalibrationRecord>& records,
                                  double current_A) {
    auto out = detail::open_out(filename);
    out << "# current_A=" << detail::fmt17(current_A) << "\n";
    out << "temperature_K,voltage_V\n";
    for (const auto& r : records)
        out << detail::fmt17(r.temperature_K) << ',' << detail::fmt17(r.voltage_V) << "\n";
    if (!out)
        throw ConfigError("write failed for '" + filename + "'");
}

struct CalibrationSweep {
    std::vector<CalibrationRecord> records;
    double current_A = 0.0;
};

inline CalibrationSweep read_calibration_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in)
        throw ConfigError("cannot open calibration file '" + filename + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError(filename + ": empty file");
    line = detail::strip_cr(line);
    const std::string magic = "# current_A=";
    if (line.rfind(magic, 0) != 0)
        throw ConfigError(filename + ":1: expected '# current_A=<value>'");
    CalibrationSweep sweep;
    sweep.current_A = detail::parse_number(line.substr(magic.size()), filename + ":1");

    std::size_t lineno = 1;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::strip_cr(line);
        if (line.empty())
            continue;
        if (!header_seen) {
            if (line != "temperature_K,voltage_V")
                throw ConfigError(filename + ":" + std::to_string(lineno) +
                                  ": expected column header 'temperature_K,voltage_V'");
            header_seen = true;
            continue;
        }
        const std::string where = filename + ":" + std::to_string(lineno);
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(where + ": expected 'temperature,voltage'");
        CalibrationRecord r;
        r.temperature_K = detail::parse_number(line.substr(0, comma), where);
        r.voltage_V = detail::parse_number(line.substr(comma + 1), where);
        sweep.records.push_back(r);
    }
    if (sweep.records.empty())
        throw ConfigError(filename + ": no calibration records");
    return sweep;
}

/// Derivative and spectrum tables for plotting: plain two-column CSV with a
/// describing comment line.
inline void write_derivative_csv(const std::string& filename, const DerivativeCurve& d) {
    auto out = detail::open_out(filename);
    out << "# etchprobe-derivative v1 columns=time_s,dvalue_dlnt\n";
    out << "time_s,dvalue_dlnt\n";
    for (std::size_t i = 0; i < d.size(); ++i)
        out << detail::fmt17(std::exp(d.z_at(i))) << ',' << detail::fmt17(d.value[i]) << "\n";
    if (!out)
        throw ConfigError("write failed for '" + filename + "'");
}

inline void write_spectrum_csv(const std::string& filename, const TimeConstantSpectrum& s) {
    auto out = detail::open_out(filename);
    out << "# etchprobe-spectrum v1 columns=tau_s,resistance_density_K_per_W_per_lntau\n";
    out << "tau_s,resistance_density\n";
    for (std::size_t i = 0; i < s.density.size(); ++i)
        out << detail::fmt17(std::exp(s.z_at(i))) << ',' << detail::fmt17(s.density[i]) << "\n";
    if (!out)
        throw ConfigError("write failed for '" + filename + "'");
}

inline void write_json_file(const std::string& filename, const Json& j) {
    auto out = detail::open_out(filename);
    out << j.dump(2) << "\n";
    if (!out)
        throw ConfigError("write failed for '" + filename + "'");
}

inline Json read_json_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in)
        throw ConfigError("cannot open JSON file '" + filename + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(filename + ": " + e.what());
    }
}

inline Json calibration_to_json(const CalibrationResult& c) {
    Json j;
    j["alpha_per_K"] = c.alpha_per_K;
    j["r_el0_ohm"] = c.r_el0_ohm;
    j["t0_K"] = c.t0_K;
    j["sensitivity_V_per_K"] = c.sensitivity_V_per_K;
    j["rms_residual_V"] = c.rms_residual_V;
    j["current_A"] = c.current_A;
    j["sample_count"] = c.sample_count;
    return j;
}

inline CalibrationResult calibration_from_json(const Json& j, const std::string& where) {
    detail::expect_keys(j, where,
                        {"alpha_per_K", "r_el0_ohm", "t0_K", "sensitivity_V_per_K",
                         "rms_residual_V", "current_A", "sample_count"});
    CalibrationResult c;
    detail::jnum(j, where, "alpha_per_K", c.alpha_per_K);
    detail::jnum(j, where, "r_el0_ohm", c.r_el0_ohm);
    detail::jnum(j, where, "t0_K", c.t0_K);
    detail::jnum(j, where, "sensitivity_V_per_K", c.sensitivity_V_per_K);
    detail::jnum(j, where, "rms_residual_V", c.rms_residual_V);
    detail::jnum(j, where, "current_A", c.current_A);
    detail::jint(j, where, "sample_count", c.sample_count);
    if (c.sensitivity_V_per_K == 0.0)
        throw ConfigError(where + ": calibration has zero sensitivity");
    return c;
}

inline Json report_to_json(const EtchReport& r) {
    Json j;
    j["amplitude_ratio"] = r.amplitude_ratio;
    j["shift_decades"] = r.shift_decades;
    j["tau_consistency_decades"] = r.tau_consistency_decades;
    j["verdict"] = verdict_name(r.verdict);
    j["ratio_threshold"] = r.ratio_threshold;
    j["consistency_threshold"] = r.consistency_threshold;
    j["amplitude_mode"] = r.amplitude_mode;
    j["t_eval_s"] = r.t_eval_s;
    j["reference_device"] = r.reference_device;
    j["reference_label"] = r.reference_label;
    j["candidate_device"] = r.candidate_device;
    j["candidate_label"] = r.candidate_label;
    return j;
}

} // namespace etchprobe
