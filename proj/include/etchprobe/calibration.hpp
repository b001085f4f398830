#pragma once

#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/curve.hpp"

namespace etchprobe {

/// One point of an oven sweep at constant sense current.
struct CalibrationRecord {
    double temperature_K = 0.0;
    double voltage_V = 0.0;
};

/// Linear electro-thermal model V(T) = I * R0 * (1 + alpha * (T - T0)).
/// sensitivity is dV/dT = I * R0 * alpha, volts per kelvin.
struct CalibrationResult {
    double alpha_per_K = 0.0;
    double r_el0_ohm = 0.0;
    double t0_K = 0.0;
    double sensitivity_V_per_K = 0.0;
    double rms_residual_V = 0.0;
    double current_A = 0.0;
    int sample_count = 0;
};

/// Least squares line through the sweep. Needs at least two distinct
/// temperatures taken at one positive current.
inline CalibrationResult fit_sensitivity(const std::vector<CalibrationRecord>& records,
                                         double current_A, double t0_K = 293.15) {
    if (records.size() < 2)
        throw ConfigError("calibration needs at least two records");
    if (!(current_A > 0.0) || !std::isfinite(current_A))
        throw ConfigError("calibration current must be positive");
    if (!(t0_K > 0.0) || !std::isfinite(t0_K))
        throw ConfigError("calibration reference temperature must be positive");

    double tmin = records.front().temperature_K, tmax = tmin;
    double st = 0.0, sv = 0.0;
    for (const auto& r : records) {
        if (!std::isfinite(r.temperature_K) || !std::isfinite(r.voltage_V))
            throw ConfigError("calibration record is not finite");
        tmin = std::min(tmin, r.temperature_K);
        tmax = std::max(tmax, r.temperature_K);
        st += r.temperature_K;
        sv += r.voltage_V;
    }
    if (!(tmax - tmin > 1e-12 * std::max(1.0, std::abs(tmax))))
        throw ConfigError("calibration needs at least two distinct temperatures");

    const double n = static_cast<double>(records.size());
    const double mt = st / n, mv = sv / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : records) {
        sxx += (r.temperature_K - mt) * (r.temperature_K - mt);
        sxy += (r.temperature_K - mt) * (r.voltage_V - mv);
    }
    const double slope = sxy / sxx;       // V per K
    const double icept = mv - slope * mt; // V at 0 K, extrapolated

    CalibrationResult out;
    out.t0_K = t0_K;
    out.current_A = current_A;
    out.sample_count = static_cast<int>(records.size());
    out.sensitivity_V_per_K = slope;
    out.r_el0_ohm = (icept + slope * t0_K) / current_A;
    if (!(out.r_el0_ohm > 0.0))
        throw ConfigError("calibration yields a non-positive resistance at the reference "
                          "temperature");
    out.alpha_per_K = slope / (current_A * out.r_el0_ohm);

    double sq = 0.0;
    for (const auto& r : records) {
        const double e = r.voltage_V - (icept + slope * r.temperature_K);
        sq += e * e;
    }
    out.rms_residual_V = std::sqrt(sq / n);
    return out;
}

/// Map a captured voltage transient to a temperature elevation transient by
/// the fitted sensitivity. Inverse of the synthesis up to parasitics/noise.
inline TransientCurve voltage_to_temperature(const TransientCurve& curve,
                                             const CalibrationResult& calib) {
    curve.validate();
    if (curve.kind != CurveKind::voltage)
        throw ConfigError("voltage_to_temperature: input is not a voltage curve");
    if (calib.sensitivity_V_per_K == 0.0 || !std::isfinite(calib.sensitivity_V_per_K))
        throw ConfigError("voltage_to_temperature: zero or invalid sensitivity");
    TransientCurve out = curve;
    out.kind = CurveKind::temperature;
    for (auto& s : out.samples)
        s.value /= calib.sensitivity_V_per_K;
    return out;
}

} // namespace etchprobe
