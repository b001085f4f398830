#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "etchprobe/config.hpp"
#include "etchprobe/curve_io.hpp"

using namespace etchprobe;
namespace fs = std::filesystem;

namespace {

// One scratch directory for the whole binary run, removed at exit.
const fs::path& work_dir() {
    static struct Dir {
        fs::path path;
        Dir() {
            path = fs::temp_directory_path() /
                   ("etchprobe-cli-" + std::to_string(::getpid()));
            fs::create_directories(path);
        }
        ~Dir() { std::error_code ec; fs::remove_all(path, ec); }
    } dir;
    return dir.path;
}

std::string wpath(const std::string& name) { return (work_dir() / name).string(); }

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int n = 0;
    const std::string out = wpath("stdout." + std::to_string(n));
    const std::string err = wpath("stderr." + std::to_string(n));
    ++n;
    const std::string cmd = std::string(ETCHPROBE_CLI_PATH) + " " + args + " >" + out +
                            " 2>" + err;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

// Coarse mesh and short transient so the subprocess runs stay fast.
const std::string& coarse_config() {
    static std::string path = [] {
        const std::string p = wpath("coarse.json");
        std::ofstream out(p);
        out << R"({
  "device_id": "cli-test",
  "seed": 3,
  "mesh": {"cell_size_m": 2.0e-5},
  "transient": {"steps_per_decade": 20, "substeps": 2, "samples_per_octave": 40},
  "analysis": {"samples_per_octave": 40, "iterations": 150}
})";
        return p;
    }();
    return path;
}

} // namespace

TEST_CASE("cli: mesh-info prints mesh statistics as JSON") {
    const RunResult r = run_cli("mesh-info --config " + coarse_config());
    REQUIRE(r.exit_code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["device_id"] == "cli-test");
    CHECK(j["nodes"].get<int>() > 50);
    CHECK(j["nodes"].get<int>() < 2000);
    CHECK(j["symmetry_factor"].get<int>() == 4);
    CHECK(j["psg_volume_m3"].get<double>() == 0.0);

    const RunResult half = run_cli("mesh-info --config " + coarse_config() +
                                   " --etch-fraction 0.5");
    REQUIRE(half.exit_code == 0);
    const Json jh = Json::parse(half.out);
    // Quarter model of an 8.8e-15 m3 gap at half fill.
    CHECK_THAT(jh["psg_volume_m3"].get<double>(),
               Catch::Matchers::WithinRel(0.5 * 8.8e-15 / 4.0, 1e-9));
}

TEST_CASE("cli: simulate writes curves and a steady summary") {
    const std::string out = wpath("sim");
    const RunResult r = run_cli("simulate --config " + coarse_config() + " --out " + out);
    REQUIRE(r.exit_code == 0);

    const Json summary = read_json_file(out + "/steady_summary.json");
    CHECK(summary["drive"] == "upper");
    CHECK(summary["power_on_W"].get<double>() > 0.0);
    CHECK(summary["peak_delta_T_K"].get<double>() > 0.0);
    CHECK(summary["driving_point_rth_K_per_W"].get<double>() > 0.0);

    const TransientCurve upper = read_curve(out + "/temperature_upper.csv");
    CHECK(upper.kind == CurveKind::temperature);
    CHECK(upper.max_value() > 0.0);
    CHECK(read_curve(out + "/temperature_lower.csv").size() > 10);
}

TEST_CASE("cli: measure output is reproducible for a fixed seed") {
    const std::string base = "measure --config " + coarse_config() + " --sense upper,lower";
    const RunResult a = run_cli(base + " --out " + wpath("meas_a"));
    const RunResult b = run_cli(base + " --out " + wpath("meas_b"));
    const RunResult c = run_cli(base + " --seed 4 --out " + wpath("meas_c"));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    REQUIRE(c.exit_code == 0);

    const std::string va = slurp(wpath("meas_a") + "/voltage_upper.csv");
    REQUIRE(!va.empty());
    CHECK(va == slurp(wpath("meas_b") + "/voltage_upper.csv"));
    CHECK(va != slurp(wpath("meas_c") + "/voltage_upper.csv"));
    CHECK(read_curve(wpath("meas_a") + "/voltage_lower.csv").kind == CurveKind::voltage);
}

TEST_CASE("cli: calibrate fits an oven sweep") {
    write_calibration_csv(wpath("sweep.csv"), {{293.15, 2.500}, {353.15, 2.560}}, 0.025);
    const std::string out = wpath("calib.json");
    const RunResult r = run_cli("calibrate --input " + wpath("sweep.csv") + " --out " + out);
    REQUIRE(r.exit_code == 0);
    const CalibrationResult fit = calibration_from_json(read_json_file(out), "calib");
    CHECK_THAT(fit.alpha_per_K, Catch::Matchers::WithinRel(4e-4, 1e-9));
    CHECK_THAT(fit.sensitivity_V_per_K, Catch::Matchers::WithinRel(1e-3, 1e-9));

    write_calibration_csv(wpath("onepoint.csv"), {{293.15, 2.500}}, 0.025);
    CHECK(run_cli("calibrate --input " + wpath("onepoint.csv")).exit_code == 2);
}

TEST_CASE("cli: analyze conditions a transient and writes a spectrum") {
    const std::string sim = wpath("sim");
    if (!fs::exists(sim + "/temperature_upper.csv"))
        REQUIRE(run_cli("simulate --config " + coarse_config() + " --out " + sim).exit_code ==
                0);

    const std::string out = wpath("ana");
    const RunResult r = run_cli("analyze --config " + coarse_config() + " --input " + sim +
                                "/temperature_upper.csv --out " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(out + "/conditioned.csv"));
    CHECK(fs::exists(out + "/derivative.csv"));
    CHECK(fs::exists(out + "/spectrum.csv"));

    const Json summary = read_json_file(out + "/analysis_summary.json");
    CHECK(summary["spectrum_mass_K_per_W"].get<double>() > 0.0);
    CHECK(summary["degenerate_zero"].get<bool>() == false);

    // The conditioned curve starts at the cut and stays log uniform.
    const TransientCurve cond = read_curve(out + "/conditioned.csv");
    CHECK(cond.samples.front().t >= 1e-5);
    CHECK(cond.log_spacing() > 0.0);
}

TEST_CASE("cli: compare classifies a device against itself as consistent") {
    const std::string sim = wpath("sim");
    if (!fs::exists(sim + "/temperature_upper.csv"))
        REQUIRE(run_cli("simulate --config " + coarse_config() + " --out " + sim).exit_code ==
                0);
    const std::string report = wpath("cmp/report.json");
    const RunResult r = run_cli("compare --config " + coarse_config() + " --ref " + sim +
                                "/temperature_upper.csv --cand " + sim +
                                "/temperature_upper.csv --out " + report);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("CONSISTENT") != std::string::npos);

    const Json rep = read_json_file(report);
    CHECK(rep["verdict"] == "CONSISTENT");
    CHECK_THAT(rep["amplitude_ratio"].get<double>(), Catch::Matchers::WithinRel(1.0, 1e-9));
    CHECK(fs::exists(wpath("cmp/report_ref.csv")));
    CHECK(fs::exists(wpath("cmp/report_cand.csv")));
    CHECK(fs::exists(wpath("cmp/report_plot.json")));
}

TEST_CASE("cli: voltage curves need a calibration") {
    const std::string meas = wpath("meas_a");
    if (!fs::exists(meas + "/voltage_upper.csv"))
        REQUIRE(run_cli("measure --config " + coarse_config() + " --out " + meas).exit_code ==
                0);
    const RunResult r = run_cli("compare --ref " + meas + "/voltage_upper.csv --cand " + meas +
                                "/voltage_upper.csv --out " + wpath("nocal.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("--calib") != std::string::npos);
}

TEST_CASE("cli: usage and config errors exit with code 2") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("calibrate").exit_code == 2);
    CHECK(run_cli("compare --ref a.csv").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);

    std::ofstream(wpath("badkey.json")) << R"({"geom": {}})";
    const RunResult r = run_cli("mesh-info --config " + wpath("badkey.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("geom") != std::string::npos);

    CHECK(run_cli("mesh-info --config " + wpath("nonexistent.json")).exit_code == 2);
    CHECK(run_cli("simulate --config " + coarse_config() + " --etch-fraction 1.5 --out " +
                  wpath("bad"))
              .exit_code == 2);
}
