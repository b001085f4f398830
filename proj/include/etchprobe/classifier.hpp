#pragma once

#include <string>

#include "etchprobe/analysis.hpp"
#include "etchprobe/common.hpp"
#include "etchprobe/curve.hpp"

namespace etchprobe {

enum class Verdict { consistent, under_etched, indeterminate };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::consistent:
        return "CONSISTENT";
    case Verdict::under_etched:
        return "UNDER_ETCHED";
    default:
        return "INDETERMINATE";
    }
}

/// Decision thresholds. A candidate is flagged under-etched when its response
/// is at least ratio_threshold times smaller than the reference and the
/// log-time shift agrees with that ratio (same tau scaling) to within
/// consistency_threshold decades. A small ratio is a pass; a large ratio
/// without the matching shift stays indeterminate.
struct ClassifierConfig {
    double ratio_threshold = 2.0;
    double consistency_threshold = 0.3;
    std::string amplitude_mode = "at_time"; // "at_time" or "max"
    double t_eval_s = 1e-5;
    int window = 21;

    void validate() const {
        if (!(ratio_threshold > 1.0) || !std::isfinite(ratio_threshold))
            throw ConfigError("classifier: ratio_threshold must be > 1");
        if (!(consistency_threshold > 0.0) || !std::isfinite(consistency_threshold))
            throw ConfigError("classifier: consistency_threshold must be > 0");
        if (amplitude_mode != "at_time" && amplitude_mode != "max")
            throw ConfigError("classifier: amplitude_mode must be 'at_time' or 'max'");
        if (!(t_eval_s > 0.0) || !std::isfinite(t_eval_s))
            throw ConfigError("classifier: t_eval_s must be positive");
        if (window < 5 || window % 2 == 0)
            throw ConfigError("classifier: window must be odd and at least 5");
    }
};

struct EtchReport {
    double amplitude_ratio = 0.0;          // reference over candidate
    double shift_decades = 0.0;            // positive: candidate decays earlier
    double tau_consistency_decades = 0.0;  // |log10(ratio) - shift|
    Verdict verdict = Verdict::indeterminate;
    double ratio_threshold = 0.0;
    double consistency_threshold = 0.0;
    std::string amplitude_mode;
    double t_eval_s = 0.0;
    std::string reference_device, reference_label;
    std::string candidate_device, candidate_label;
};

/// Compare a candidate device's cooling transient against a known-good
/// reference. Both curves must be temperature elevations on matching
/// log-uniform lattices (voltage captures go through a calibration first).
inline EtchReport compare_curves(const TransientCurve& reference,
                                 const TransientCurve& candidate,
                                 const ClassifierConfig& cfg = {}) {
    cfg.validate();
    reference.validate();
    candidate.validate();
    if (reference.kind != CurveKind::temperature || candidate.kind != CurveKind::temperature)
        throw ConfigError("compare_curves: expected temperature curves; convert voltage "
                          "captures with a calibration first");

    auto amplitude = [&](const TransientCurve& c) {
        return cfg.amplitude_mode == "max" ? c.max_value() : amplitude_at(c, cfg.t_eval_s);
    };
    const double ref_amp = amplitude(reference);
    const double cand_amp = amplitude(candidate);
    if (!(ref_amp > 0.0) || !(cand_amp > 0.0))
        throw ConfigError("compare_curves: non-positive response amplitude");

    EtchReport rep;
    rep.amplitude_ratio = ref_amp / cand_amp;
    rep.shift_decades = estimate_shift(reference, candidate, cfg.window);
    rep.tau_consistency_decades = std::abs(std::log10(rep.amplitude_ratio) - rep.shift_decades);
    rep.ratio_threshold = cfg.ratio_threshold;
    rep.consistency_threshold = cfg.consistency_threshold;
    rep.amplitude_mode = cfg.amplitude_mode;
    rep.t_eval_s = cfg.t_eval_s;
    rep.reference_device = reference.device;
    rep.reference_label = reference.label;
    rep.candidate_device = candidate.device;
    rep.candidate_label = candidate.label;

    if (rep.amplitude_ratio < cfg.ratio_threshold)
        rep.verdict = Verdict::consistent;
    else if (rep.tau_consistency_decades <= cfg.consistency_threshold)
        rep.verdict = Verdict::under_etched;
    else
        rep.verdict = Verdict::indeterminate;
    return rep;
}

} // namespace etchprobe
