// Command line front end: simulate, measure, calibrate, analyze, compare,
// mesh-info. Exit codes: 0 success, 2 bad usage or config, 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "etchprobe/etchprobe.hpp"

namespace fs = std::filesystem;
using namespace etchprobe;

namespace {

std::string fnum(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

RunConfig load_config(const std::string& path) {
    if (path.empty())
        return RunConfig{};
    return load_run_config(path);
}

void make_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

std::set<BeamId> parse_sense_list(const std::string& csv) {
    std::set<BeamId> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const auto comma = csv.find(',', pos);
        const std::string item =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty())
            out.insert(beam_from_name(item));
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (out.empty())
        throw ConfigError("--sense: no beams given");
    return out;
}

struct CommonOpts {
    std::string config_path;
    std::optional<double> etch_fraction;
    std::string out;
};

void run_simulate(const CommonOpts& common, const std::string& drive_name) {
    RunConfig cfg = load_config(common.config_path);
    if (common.etch_fraction)
        cfg.etch_fraction = *common.etch_fraction;
    const std::string out_dir = common.out.empty() ? cfg.output_dir : common.out;
    make_output_dir(out_dir);

    const BeamId drive = beam_from_name(drive_name);
    const DeviceGeometry geom = cfg.build_geometry();
    const ThermalNetwork net = discretize(geom, cfg.mesh);

    const BeamElectrical& be = cfg.measurement.beam(drive);
    const double p_on = joule_power(be.i_sense_A + cfg.measurement.i_drive_A, be.r_el0_ohm);
    const double p_off = joule_power(be.i_sense_A, be.r_el0_ohm);
    const auto& heater = net.taps(drive).heater;
    if (heater.empty())
        throw ConfigError("simulate: no heater nodes on the driven beam");

    const Eigen::VectorXd pvec_on = distribute_power(net, heater, p_on);
    const Eigen::VectorXd pvec_off = distribute_power(net, heater, p_off);
    const Eigen::VectorXd field = steady_state(net, pvec_on);
    const int hot = hotspot_location(field);

    auto curves = transient_switch_off(net, pvec_on, pvec_off, cfg.transient);
    const std::string label = "f=" + fnum(cfg.etch_fraction) + " drive=" + beam_name(drive);
    for (auto& [beam, curve] : curves) {
        curve.device = cfg.device_id;
        curve.label = label;
        write_curve(out_dir + "/temperature_" + beam_name(beam) + ".csv", curve);
    }

    Json summary;
    summary["device_id"] = cfg.device_id;
    summary["etch_fraction"] = cfg.etch_fraction;
    summary["drive"] = beam_name(drive);
    summary["node_count"] = net.size();
    summary["edge_count"] = static_cast<int>(net.edges.size());
    summary["symmetry_factor"] = net.symmetry_factor;
    summary["power_on_W"] = p_on;
    summary["power_off_W"] = p_off;
    summary["peak_delta_T_K"] = field.maxCoeff();
    summary["hotspot_node"] = hot;
    summary["hotspot_position_m"] = {net.nodes[hot].position[0], net.nodes[hot].position[1],
                                     net.nodes[hot].position[2]};
    summary["driving_point_rth_K_per_W"] = driving_point_rth(net, heater);
    write_json_file(out_dir + "/steady_summary.json", summary);
    std::cout << "simulate: wrote " << out_dir << "/steady_summary.json and "
              << curves.size() << " curve file(s)\n";
}

void run_measure(const CommonOpts& common, const std::string& drive_name,
                 const std::string& sense_csv, std::optional<std::uint64_t> seed) {
    RunConfig cfg = load_config(common.config_path);
    if (common.etch_fraction)
        cfg.etch_fraction = *common.etch_fraction;
    if (seed)
        cfg.measurement.seed = *seed;
    const std::string out_dir = common.out.empty() ? cfg.output_dir : common.out;
    make_output_dir(out_dir);

    const BeamId drive = beam_from_name(drive_name);
    const std::set<BeamId> sensed = parse_sense_list(sense_csv);
    const DeviceGeometry geom = cfg.build_geometry();
    const ThermalNetwork net = discretize(geom, cfg.mesh);

    auto curves = run_virtual_experiment(net, cfg.measurement, drive, sensed, cfg.transient);
    const std::string label = "f=" + fnum(cfg.etch_fraction) + " drive=" + beam_name(drive);
    for (auto& [beam, curve] : curves) {
        curve.device = cfg.device_id;
        curve.label = label;
        write_curve(out_dir + "/voltage_" + beam_name(beam) + ".csv", curve);
    }
    std::cout << "measure: wrote " << curves.size() << " voltage curve file(s) to " << out_dir
              << "\n";
}

void run_calibrate(const std::string& input, const std::string& out, double t0) {
    const CalibrationSweep sweep = read_calibration_csv(input);
    const CalibrationResult fit = fit_sensitivity(sweep.records, sweep.current_A, t0);
    write_json_file(out, calibration_to_json(fit));
    std::cout << "calibrate: sensitivity " << fit.sensitivity_V_per_K << " V/K, alpha "
              << fit.alpha_per_K << " 1/K -> " << out << "\n";
}

TransientCurve to_temperature(const TransientCurve& c, const std::string& calib_path,
                              const char* flag_hint) {
    if (c.kind == CurveKind::temperature)
        return c;
    if (calib_path.empty())
        throw ConfigError(std::string("voltage curve needs ") + flag_hint +
                          " to convert to temperature");
    const CalibrationResult calib =
        calibration_from_json(read_json_file(calib_path), calib_path);
    return voltage_to_temperature(c, calib);
}

void run_analyze(const CommonOpts& common, const std::string& input,
                 const std::string& calib_path, std::optional<double> t_cut,
                 std::optional<int> spo) {
    RunConfig cfg = load_config(common.config_path);
    if (t_cut)
        cfg.analysis.t_cut_s = *t_cut;
    if (spo)
        cfg.analysis.samples_per_octave = *spo;
    cfg.analysis.validate();
    const std::string out_dir = common.out.empty() ? cfg.output_dir : common.out;
    make_output_dir(out_dir);

    TransientCurve curve = read_curve(input);
    curve.device = input;
    curve = to_temperature(curve, calib_path, "--calib");
    curve = cut_early(curve, cfg.analysis.t_cut_s);
    curve = resample_log(curve, cfg.analysis.samples_per_octave);
    write_curve(out_dir + "/conditioned.csv", curve);

    const DerivativeCurve d = smooth_derivative(curve, cfg.analysis.window);
    write_derivative_csv(out_dir + "/derivative.csv", d);

    // The spectrum works on the rising (heating) derivative; a switch-off
    // decay is its mirror image, so predominantly falling derivatives get
    // flipped rather than assuming one capture convention.
    DerivativeCurve decay = d;
    double lo = 0.0, hi = 0.0;
    for (double v : decay.value) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (-lo > hi)
        for (auto& v : decay.value)
            v = -v;
    const TimeConstantSpectrum spec = deconvolve_spectrum(decay, cfg.analysis.iterations);
    write_spectrum_csv(out_dir + "/spectrum.csv", spec);

    Json summary;
    summary["input"] = input;
    summary["t_cut_s"] = cfg.analysis.t_cut_s;
    summary["samples_per_octave"] = cfg.analysis.samples_per_octave;
    summary["window"] = cfg.analysis.window;
    summary["iterations"] = cfg.analysis.iterations;
    summary["sample_count"] = static_cast<int>(curve.size());
    summary["amplitude_max_K"] = curve.max_value();
    summary["spectrum_mass_K_per_W"] = spec.mass();
    summary["reconvolution_rms_rel"] = spec.reconvolution_rms_rel;
    summary["degenerate_zero"] = spec.degenerate_zero;
    if (!spec.degenerate_zero && spec.mass() > 0.0)
        summary["spectrum_centroid_log10_tau"] = spec.centroid_log10_tau();
    write_json_file(out_dir + "/analysis_summary.json", summary);
    std::cout << "analyze: wrote conditioned/derivative/spectrum to " << out_dir << "\n";
}

void run_compare(const CommonOpts& common, const std::string& ref_path,
                 const std::string& cand_path, const std::string& calib_path,
                 std::optional<double> t_cut, std::optional<int> spo) {
    RunConfig cfg = load_config(common.config_path);
    if (t_cut)
        cfg.analysis.t_cut_s = *t_cut;
    if (spo)
        cfg.analysis.samples_per_octave = *spo;
    cfg.analysis.validate();
    const std::string out_path = common.out.empty() ? cfg.output_dir + "/report.json" : common.out;
    if (!fs::path(out_path).parent_path().empty())
        make_output_dir(fs::path(out_path).parent_path().string());

    TransientCurve ref = read_curve(ref_path);
    TransientCurve cand = read_curve(cand_path);
    ref.device = ref_path;
    cand.device = cand_path;
    ref = to_temperature(ref, calib_path, "--calib");
    cand = to_temperature(cand, calib_path, "--calib");

    // Shared conditioning: one common window so both land on the same lattice.
    const double t_lo = std::max({ref.samples.front().t, cand.samples.front().t,
                                  cfg.analysis.t_cut_s});
    const double t_hi = std::min(ref.samples.back().t, cand.samples.back().t);
    if (!(t_hi > t_lo))
        throw ConfigError("compare: curves share no time window after the cut");
    ref = resample_log(crop_curve(ref, t_lo, t_hi), cfg.analysis.samples_per_octave);
    cand = resample_log(crop_curve(cand, t_lo, t_hi), cfg.analysis.samples_per_octave);

    const EtchReport report = compare_curves(ref, cand, cfg.classifier);
    write_json_file(out_path, report_to_json(report));

    // Plot data: the two conditioned curves plus a manifest of the series.
    const fs::path base = fs::path(out_path).parent_path() / fs::path(out_path).stem();
    write_curve(base.string() + "_ref.csv", ref);
    write_curve(base.string() + "_cand.csv", cand);
    Json plot;
    plot["series"] = Json::array({Json{{"name", "reference"},
                                       {"file", fs::path(base.string() + "_ref.csv").filename().string()},
                                       {"source", ref_path}},
                                  Json{{"name", "candidate"},
                                       {"file", fs::path(base.string() + "_cand.csv").filename().string()},
                                       {"source", cand_path}}});
    plot["x"] = "time_s";
    plot["y"] = "temperature_elevation_K";
    write_json_file(base.string() + "_plot.json", plot);

    std::cout << "compare: " << verdict_name(report.verdict) << " (amplitude ratio "
              << fnum(report.amplitude_ratio) << ", shift " << fnum(report.shift_decades)
              << " decades, consistency " << fnum(report.tau_consistency_decades)
              << " decades) -> " << out_path << "\n";
}

void run_mesh_info(const CommonOpts& common) {
    RunConfig cfg = load_config(common.config_path);
    if (common.etch_fraction)
        cfg.etch_fraction = *common.etch_fraction;
    const DeviceGeometry geom = cfg.build_geometry();
    const ThermalNetwork net = discretize(geom, cfg.mesh);
    Json j;
    j["device_id"] = cfg.device_id;
    j["etch_fraction"] = cfg.etch_fraction;
    j["nodes"] = net.size();
    j["internal_edges"] = static_cast<int>(net.edges.size());
    j["ambient_edges"] = static_cast<int>(net.ambient_edges.size());
    j["total_capacitance_J_per_K"] = net.total_capacitance();
    j["symmetry_factor"] = net.symmetry_factor;
    j["upper_heater_nodes"] = static_cast<int>(net.upper.heater.size());
    j["lower_heater_nodes"] = static_cast<int>(net.lower.heater.size());
    j["psg_volume_m3"] = geom.psg_volume();
    std::cout << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermal transient inspection of sacrificial layer etching"};
    app.require_subcommand(1);

    CommonOpts sim_o, meas_o, ana_o, cmp_o, mesh_o;
    std::string sim_drive = "upper", meas_drive = "upper", meas_sense = "upper,lower";
    std::optional<std::uint64_t> meas_seed;
    std::string cal_in, cal_out = "calib.json";
    double cal_t0 = 293.15;
    std::string ana_in, ana_calib, cmp_ref, cmp_cand, cmp_calib;
    std::optional<double> ana_tcut, cmp_tcut;
    std::optional<int> ana_spo, cmp_spo;

    auto add_common = [](CLI::App* sub, CommonOpts& o, bool with_fraction = true) {
        sub->add_option("--config", o.config_path, "JSON config file");
        if (with_fraction)
            sub->add_option("--etch-fraction", o.etch_fraction,
                            "remaining sacrificial fraction in [0,1]");
        sub->add_option("--out", o.out, "output directory or file");
    };

    auto* sim = app.add_subcommand("simulate",
                                   "steady field and switch-off temperature transients");
    add_common(sim, sim_o);
    sim->add_option("--drive", sim_drive, "heated beam: upper or lower");
    sim->callback([&] { run_simulate(sim_o, sim_drive); });

    auto* meas = app.add_subcommand("measure", "synthetic tester voltage captures");
    add_common(meas, meas_o);
    meas->add_option("--drive", meas_drive, "driven beam: upper or lower");
    meas->add_option("--sense", meas_sense, "comma list of sensed beams");
    meas->add_option("--seed", meas_seed, "override the rng seed");
    meas->callback([&] { run_measure(meas_o, meas_drive, meas_sense, meas_seed); });

    auto* cal = app.add_subcommand("calibrate", "fit V(T) sensitivity from an oven sweep");
    cal->add_option("--input", cal_in, "calibration CSV")->required();
    cal->add_option("--out", cal_out, "output JSON file");
    cal->add_option("--t0", cal_t0, "reference temperature in K");
    cal->callback([&] { run_calibrate(cal_in, cal_out, cal_t0); });

    auto* ana = app.add_subcommand("analyze",
                                   "condition a transient and extract its time constant "
                                   "spectrum");
    add_common(ana, ana_o, false);
    ana->add_option("--input", ana_in, "curve CSV")->required();
    ana->add_option("--calib", ana_calib, "calibration JSON for voltage curves");
    ana->add_option("--t-cut", ana_tcut, "discard samples before this time (s)");
    ana->add_option("--samples-per-octave", ana_spo, "resampling density");
    ana->callback([&] { run_analyze(ana_o, ana_in, ana_calib, ana_tcut, ana_spo); });

    auto* cmp = app.add_subcommand("compare", "classify a candidate against a reference");
    add_common(cmp, cmp_o, false);
    cmp->add_option("--ref", cmp_ref, "reference curve CSV")->required();
    cmp->add_option("--cand", cmp_cand, "candidate curve CSV")->required();
    cmp->add_option("--calib", cmp_calib, "calibration JSON for voltage curves");
    cmp->add_option("--t-cut", cmp_tcut, "discard samples before this time (s)");
    cmp->add_option("--samples-per-octave", cmp_spo, "resampling density");
    cmp->callback([&] { run_compare(cmp_o, cmp_ref, cmp_cand, cmp_calib, cmp_tcut, cmp_spo); });

    auto* mi = app.add_subcommand("mesh-info", "print mesh statistics as JSON");
    add_common(mi, mesh_o);
    mi->callback([&] { run_mesh_info(mesh_o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
