#pragma once

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "etchprobe/classifier.hpp"
#include "etchprobe/common.hpp"
#include "etchprobe/geometry.hpp"
#include "etchprobe/instrument.hpp"
#include "etchprobe/materials.hpp"
#include "etchprobe/mesh.hpp"
#include "etchprobe/solver.hpp"

namespace etchprobe {

using Json = nlohmann::ordered_json;

/// Transient conditioning and spectrum extraction knobs.
struct AnalysisConfig {
    double t_cut_s = 1e-5; // discard the electrically disturbed early part
    int samples_per_octave = 200;
    int window = 21;
    int iterations = 500;

    void validate() const {
        if (!(t_cut_s >= 0.0) || !std::isfinite(t_cut_s))
            throw ConfigError("analysis: t_cut_s must be >= 0");
        if (samples_per_octave < 8)
            throw ConfigError("analysis: samples_per_octave must be at least 8");
        if (window < 5 || window % 2 == 0)
            throw ConfigError("analysis: window must be odd and at least 5");
        if (iterations < 1)
            throw ConfigError("analysis: iterations must be positive");
    }
};

/// Whole-run settings: device, mesh, solver grid, instrument, analysis and
/// decision thresholds. Every field has a working default; a config file
/// overrides selectively. Unknown keys anywhere are hard errors.
struct RunConfig {
    std::string device_id = "resonator";
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    ResonatorParams geometry;
    double etch_fraction = 0.0;
    bool quarter = true;
    MaterialTable materials = default_material_table();
    MeshOptions mesh;
    TransientGrid transient;
    MeasurementSetup measurement;
    AnalysisConfig analysis;
    ClassifierConfig classifier;

    void validate() const {
        geometry.validate();
        if (!(etch_fraction >= 0.0 && etch_fraction <= 1.0))
            throw ConfigError("etch_fraction must be in [0, 1]");
        mesh.validate();
        transient.validate();
        measurement.validate();
        analysis.validate();
        classifier.validate();
        if (output_dir.empty())
            throw ConfigError("output_dir must not be empty");
    }

    /// Device with the configured etch fraction, reduced to a quarter when
    /// the symmetry option is on.
    DeviceGeometry build_geometry(double f) const {
        DeviceGeometry g = build_resonator(geometry, f, materials);
        if (quarter)
            g = quarter_model(g);
        return g;
    }
    DeviceGeometry build_geometry() const { return build_geometry(etch_fraction); }
};

namespace detail {

inline std::string join_key(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void expect_keys(const Json& j, const std::string& path,
                        std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ConfigError("config: " + (path.empty() ? std::string("top level") : path) +
                          " must be an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("config: unknown key '" + join_key(path, item.key()) + "'");
    }
}

inline void jnum(const Json& j, const std::string& path, const char* key, double& out) {
    if (!j.contains(key))
        return;
    const auto& v = j[key];
    if (!v.is_number())
        throw ConfigError("config: " + join_key(path, key) + " must be a number");
    out = v.get<double>();
    if (!std::isfinite(out))
        throw ConfigError("config: " + join_key(path, key) + " must be finite");
}

inline void jint(const Json& j, const std::string& path, const char* key, int& out) {
    if (!j.contains(key))
        return;
    const auto& v = j[key];
    if (!v.is_number_integer())
        throw ConfigError("config: " + join_key(path, key) + " must be an integer");
    out = v.get<int>();
}

inline void juint64(const Json& j, const std::string& path, const char* key,
                    std::uint64_t& out) {
    if (!j.contains(key))
        return;
    const auto& v = j[key];
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError("config: " + join_key(path, key) + " must be a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
        throw ConfigError("config: " + join_key(path, key) + " must be a non-negative integer");
    out = v.get<std::uint64_t>();
}

inline void jbool(const Json& j, const std::string& path, const char* key, bool& out) {
    if (!j.contains(key))
        return;
    const auto& v = j[key];
    if (!v.is_boolean())
        throw ConfigError("config: " + join_key(path, key) + " must be a boolean");
    out = v.get<bool>();
}

inline void jstr(const Json& j, const std::string& path, const char* key, std::string& out) {
    if (!j.contains(key))
        return;
    const auto& v = j[key];
    if (!v.is_string())
        throw ConfigError("config: " + join_key(path, key) + " must be a string");
    out = v.get<std::string>();
}

inline void parse_geometry(const Json& j, RunConfig& cfg) {
    const std::string path = "geometry";
    expect_keys(j, path,
                {"substrate_length_m", "substrate_width_m", "substrate_thickness_m",
                 "nitride_thickness_m", "lower_beam_length_m", "lower_beam_width_m",
                 "lower_beam_thickness_m", "upper_beam_length_m", "upper_beam_width_m",
                 "upper_beam_thickness_m", "gap1_m", "gap2_m", "overlap_length_m",
                 "anchor_length_m", "ambient_K", "substrate_material", "nitride_material",
                 "beam_material", "psg_material", "gap_fill", "etch_fraction", "quarter"});
    auto& g = cfg.geometry;
    jnum(j, path, "substrate_length_m", g.substrate_length);
    jnum(j, path, "substrate_width_m", g.substrate_width);
    jnum(j, path, "substrate_thickness_m", g.substrate_thickness);
    jnum(j, path, "nitride_thickness_m", g.nitride_thickness);
    jnum(j, path, "lower_beam_length_m", g.lower_beam_length);
    jnum(j, path, "lower_beam_width_m", g.lower_beam_width);
    jnum(j, path, "lower_beam_thickness_m", g.lower_beam_thickness);
    jnum(j, path, "upper_beam_length_m", g.upper_beam_length);
    jnum(j, path, "upper_beam_width_m", g.upper_beam_width);
    jnum(j, path, "upper_beam_thickness_m", g.upper_beam_thickness);
    jnum(j, path, "gap1_m", g.gap1);
    jnum(j, path, "gap2_m", g.gap2);
    jnum(j, path, "overlap_length_m", g.overlap_length);
    jnum(j, path, "anchor_length_m", g.anchor_length);
    jnum(j, path, "ambient_K", g.ambient_K);
    jstr(j, path, "substrate_material", g.substrate_material);
    jstr(j, path, "nitride_material", g.nitride_material);
    jstr(j, path, "beam_material", g.beam_material);
    jstr(j, path, "psg_material", g.psg_material);
    jstr(j, path, "gap_fill", g.gap_fill);
    jnum(j, path, "etch_fraction", cfg.etch_fraction);
    jbool(j, path, "quarter", cfg.quarter);
}

inline void parse_materials(const Json& j, RunConfig& cfg) {
    if (!j.is_object())
        throw ConfigError("config: materials must be an object");
    for (const auto& item : j.items()) {
        const std::string path = "materials." + item.key();
        expect_keys(item.value(), path,
                    {"conductivity_W_per_m_K", "volumetric_heat_capacity_J_per_m3_K"});
        Material m;
        m.name = item.key();
        // Start from the existing entry so overrides can be partial.
        if (cfg.materials.contains(m.name))
            m = cfg.materials.lookup(m.name);
        jnum(item.value(), path, "conductivity_W_per_m_K", m.conductivity);
        jnum(item.value(), path, "volumetric_heat_capacity_J_per_m3_K",
             m.volumetric_heat_capacity);
        cfg.materials.set(m);
    }
}

inline void parse_mesh(const Json& j, RunConfig& cfg) {
    const std::string path = "mesh";
    expect_keys(j, path, {"cell_size_m", "film_coefficient_W_per_m2_K"});
    if (j.contains("cell_size_m")) {
        const auto& v = j["cell_size_m"];
        if (v.is_number()) {
            const double s = v.get<double>();
            cfg.mesh.cell_size = {s, s, s};
        } else if (v.is_array() && v.size() == 3) {
            for (int k = 0; k < 3; ++k) {
                if (!v[k].is_number())
                    throw ConfigError("config: mesh.cell_size_m entries must be numbers");
                cfg.mesh.cell_size[k] = v[k].get<double>();
            }
        } else {
            throw ConfigError("config: mesh.cell_size_m must be a number or an array of 3");
        }
    }
    jnum(j, path, "film_coefficient_W_per_m2_K", cfg.mesh.film_coefficient);
}

inline void parse_transient(const Json& j, RunConfig& cfg) {
    const std::string path = "transient";
    expect_keys(j, path,
                {"t_min_s", "t_max_s", "steps_per_decade", "substeps", "samples_per_octave"});
    jnum(j, path, "t_min_s", cfg.transient.t_min);
    jnum(j, path, "t_max_s", cfg.transient.t_max);
    jint(j, path, "steps_per_decade", cfg.transient.steps_per_decade);
    jint(j, path, "substeps", cfg.transient.substeps);
    jint(j, path, "samples_per_octave", cfg.transient.samples_per_octave);
}

inline void parse_beam_electrical(const Json& j, const std::string& path, BeamElectrical& be) {
    expect_keys(j, path, {"i_sense_A", "r_el0_ohm", "alpha_per_K"});
    jnum(j, path, "i_sense_A", be.i_sense_A);
    jnum(j, path, "r_el0_ohm", be.r_el0_ohm);
    jnum(j, path, "alpha_per_K", be.alpha_per_K);
}

inline void parse_measurement(const Json& j, RunConfig& cfg) {
    const std::string path = "measurement";
    expect_keys(j, path,
                {"i_drive_A", "parasitic_tau_s", "parasitic_amplitude_V", "noise_rms_V",
                 "upper", "lower"});
    jnum(j, path, "i_drive_A", cfg.measurement.i_drive_A);
    jnum(j, path, "parasitic_tau_s", cfg.measurement.parasitic_tau_s);
    jnum(j, path, "parasitic_amplitude_V", cfg.measurement.parasitic_amplitude_V);
    jnum(j, path, "noise_rms_V", cfg.measurement.noise_rms_V);
    if (j.contains("upper"))
        parse_beam_electrical(j["upper"], "measurement.upper", cfg.measurement.upper);
    if (j.contains("lower"))
        parse_beam_electrical(j["lower"], "measurement.lower", cfg.measurement.lower);
}

inline void parse_analysis(const Json& j, RunConfig& cfg) {
    const std::string path = "analysis";
    expect_keys(j, path, {"t_cut_s", "samples_per_octave", "window", "iterations"});
    jnum(j, path, "t_cut_s", cfg.analysis.t_cut_s);
    jint(j, path, "samples_per_octave", cfg.analysis.samples_per_octave);
    jint(j, path, "window", cfg.analysis.window);
    jint(j, path, "iterations", cfg.analysis.iterations);
}

inline void parse_classifier(const Json& j, RunConfig& cfg) {
    const std::string path = "classifier";
    expect_keys(j, path,
                {"ratio_threshold", "consistency_threshold", "amplitude_mode", "t_eval_s",
                 "window"});
    jnum(j, path, "ratio_threshold", cfg.classifier.ratio_threshold);
    jnum(j, path, "consistency_threshold", cfg.classifier.consistency_threshold);
    jstr(j, path, "amplitude_mode", cfg.classifier.amplitude_mode);
    jnum(j, path, "t_eval_s", cfg.classifier.t_eval_s);
    jint(j, path, "window", cfg.classifier.window);
}

} // namespace detail

inline RunConfig parse_run_config(const Json& j) {
    RunConfig cfg;
    detail::expect_keys(j, "",
                        {"device_id", "seed", "output_dir", "geometry", "materials", "mesh",
                         "transient", "measurement", "analysis", "classifier"});
    detail::jstr(j, "", "device_id", cfg.device_id);
    detail::juint64(j, "", "seed", cfg.seed);
    detail::jstr(j, "", "output_dir", cfg.output_dir);
    // Materials first so geometry material names can resolve against overrides.
    if (j.contains("materials"))
        detail::parse_materials(j["materials"], cfg);
    if (j.contains("geometry"))
        detail::parse_geometry(j["geometry"], cfg);
    if (j.contains("mesh"))
        detail::parse_mesh(j["mesh"], cfg);
    if (j.contains("transient"))
        detail::parse_transient(j["transient"], cfg);
    if (j.contains("measurement"))
        detail::parse_measurement(j["measurement"], cfg);
    if (j.contains("analysis"))
        detail::parse_analysis(j["analysis"], cfg);
    if (j.contains("classifier"))
        detail::parse_classifier(j["classifier"], cfg);
    cfg.measurement.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::string& filename) {
    std::ifstream in(filename);
    if (!in)
        throw ConfigError("cannot open config file '" + filename + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Map the byte offset to line:column for a usable diagnostic.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(filename + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    try {
        return parse_run_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(filename + ": " + e.what());
    }
}

} // namespace etchprobe
