#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "etchprobe/common.hpp"

namespace etchprobe {

enum class CurveKind { temperature, voltage };

inline const char* curve_kind_name(CurveKind k) {
    return k == CurveKind::temperature ? "temperature" : "voltage";
}

inline CurveKind curve_kind_from_name(const std::string& s) {
    if (s == "temperature")
        return CurveKind::temperature;
    if (s == "voltage")
        return CurveKind::voltage;
    throw ConfigError("unknown curve kind '" + s + "'");
}

struct Sample {
    double t = 0.0; // seconds, strictly positive
    double value = 0.0;
};

/// Sampled transient, strictly increasing in time. Temperature curves hold
/// the elevation over ambient in kelvin, voltage curves the raw reading in
/// volts. device/label are free-form provenance carried through files.
struct TransientCurve {
    CurveKind kind = CurveKind::temperature;
    std::vector<Sample> samples;
    std::string device;
    std::string label;

    std::size_t size() const { return samples.size(); }

    void validate(std::size_t min_samples = 2) const {
        if (samples.size() < min_samples)
            throw ConfigError("curve has fewer than " + std::to_string(min_samples) +
                              " samples");
        double prev = 0.0;
        for (const auto& s : samples) {
            if (!(s.t > prev) || !std::isfinite(s.t))
                throw ConfigError("curve times must be finite, positive, strictly increasing");
            if (!std::isfinite(s.value))
                throw ConfigError("curve values must be finite");
            prev = s.t;
        }
    }

    double max_value() const {
        double m = samples.front().value;
        for (const auto& s : samples)
            m = std::max(m, s.value);
        return m;
    }

    double max_abs_value() const {
        double m = 0.0;
        for (const auto& s : samples)
            m = std::max(m, std::abs(s.value));
        return m;
    }

    /// Spacing in ln t if the samples form a uniform logarithmic lattice,
    /// 0 otherwise.
    double log_spacing(double rel_tol = 1e-6) const {
        if (samples.size() < 2)
            return 0.0;
        const double dz =
            (std::log(samples.back().t) - std::log(samples.front().t)) / (samples.size() - 1);
        if (!(dz > 0.0))
            return 0.0;
        for (std::size_t i = 1; i < samples.size(); ++i) {
            const double step = std::log(samples[i].t) - std::log(samples[i - 1].t);
            if (std::abs(step - dz) > rel_tol * dz)
                return 0.0;
        }
        return dz;
    }
};

/// Value at time t by interpolation, linear in ln t. t must lie inside the
/// sampled range.
inline double amplitude_at(const TransientCurve& c, double t) {
    c.validate();
    if (!(t >= c.samples.front().t && t <= c.samples.back().t))
        throw ConfigError("amplitude_at: time outside the sampled range");
    auto it = std::lower_bound(c.samples.begin(), c.samples.end(), t,
                               [](const Sample& s, double v) { return s.t < v; });
    if (it == c.samples.begin())
        return it->value;
    const Sample& hi = *it;
    const Sample& lo = *(it - 1);
    if (hi.t == lo.t)
        return hi.value;
    const double u = (std::log(t) - std::log(lo.t)) / (std::log(hi.t) - std::log(lo.t));
    return lo.value + u * (hi.value - lo.value);
}

/// Resample onto a uniform ln t lattice covering [t_first, t_last] inclusive,
/// with at least samples_per_octave points per factor of two. The spacing is
/// snapped so the lattice lands exactly on both endpoints, which keeps the
/// operation idempotent on already uniform input.
inline TransientCurve resample_log(const TransientCurve& in, int samples_per_octave = 200) {
    in.validate();
    if (samples_per_octave < 8)
        throw ConfigError("resample_log: samples_per_octave must be at least 8");

    const double z0 = std::log(in.samples.front().t);
    const double z1 = std::log(in.samples.back().t);
    const double span = z1 - z0;
    const double ln2 = std::numbers::ln2;
    int n = static_cast<int>(std::floor(span / ln2 * samples_per_octave + 1e-9)) + 1;
    n = std::max(n, 2);
    const double dz = span / (n - 1);

    TransientCurve out;
    out.kind = in.kind;
    out.device = in.device;
    out.label = in.label;
    out.samples.resize(n);

    std::size_t j = 1;
    for (int i = 0; i < n; ++i) {
        if (i == 0) {
            out.samples[i] = in.samples.front();
            continue;
        }
        if (i == n - 1) {
            out.samples[i] = in.samples.back();
            continue;
        }
        const double z = z0 + i * dz;
        while (j + 1 < in.samples.size() && std::log(in.samples[j].t) < z)
            ++j;
        const auto& lo = in.samples[j - 1];
        const auto& hi = in.samples[j];
        const double zlo = std::log(lo.t), zhi = std::log(hi.t);
        const double u = std::clamp((z - zlo) / (zhi - zlo), 0.0, 1.0);
        out.samples[i] = {std::exp(z), lo.value + u * (hi.value - lo.value)};
    }
    return out;
}

/// Restrict a curve to [t_lo, t_hi], interpolating exact boundary samples so
/// two curves cropped to the same window resample onto identical lattices.
inline TransientCurve crop_curve(const TransientCurve& in, double t_lo, double t_hi) {
    in.validate();
    if (!(t_lo > 0.0) || !(t_hi > t_lo))
        throw ConfigError("crop_curve: need 0 < t_lo < t_hi");
    if (t_lo < in.samples.front().t || t_hi > in.samples.back().t)
        throw ConfigError("crop_curve: window outside the sampled range");
    TransientCurve out;
    out.kind = in.kind;
    out.device = in.device;
    out.label = in.label;
    out.samples.push_back({t_lo, amplitude_at(in, t_lo)});
    for (const auto& s : in.samples)
        if (s.t > t_lo && s.t < t_hi)
            out.samples.push_back(s);
    out.samples.push_back({t_hi, amplitude_at(in, t_hi)});
    return out;
}

/// Drop samples earlier than t_cut (electrical switching disturbance window).
/// t_cut <= 0 keeps the curve as is.
inline TransientCurve cut_early(const TransientCurve& in, double t_cut) {
    in.validate();
    if (!(t_cut > 0.0))
        return in;
    TransientCurve out;
    out.kind = in.kind;
    out.device = in.device;
    out.label = in.label;
    for (const auto& s : in.samples)
        if (s.t >= t_cut)
            out.samples.push_back(s);
    if (out.samples.size() < 2)
        throw ConfigError("cut_early: cut time removes nearly the whole curve");
    return out;
}

} // namespace etchprobe
