#pragma once

#include <map>
#include <random>
#include <set>

#include "etchprobe/common.hpp"
#include "etchprobe/curve.hpp"
#include "etchprobe/network.hpp"
#include "etchprobe/solver.hpp"

namespace etchprobe {

/// Electrical parameters of one beam used as heater and sensing resistor.
struct BeamElectrical {
    double i_sense_A = 0.025;
    double r_el0_ohm = 100.0;
    double alpha_per_K = 4.0e-4;

    void validate(const char* which) const {
        if (!(i_sense_A >= 0.0) || !std::isfinite(i_sense_A))
            throw ConfigError(std::string("measurement: ") + which + " i_sense_A must be >= 0");
        if (!(r_el0_ohm > 0.0) || !std::isfinite(r_el0_ohm))
            throw ConfigError(std::string("measurement: ") + which + " r_el0_ohm must be > 0");
        if (!std::isfinite(alpha_per_K))
            throw ConfigError(std::string("measurement: ") + which + " alpha_per_K not finite");
    }
};

/// Virtual transient tester: drive current step on one beam, sense currents
/// on the read-out beams, capacitive switching artifact and gaussian reading
/// noise on the captured voltage.
struct MeasurementSetup {
    BeamElectrical upper{0.025, 100.0, 4.0e-4};
    BeamElectrical lower{0.025, 33.0, 4.0e-4};
    double i_drive_A = 0.025;
    double parasitic_tau_s = 1.5e-6;
    double parasitic_amplitude_V = 0.02;
    double noise_rms_V = 5e-5;
    std::uint64_t seed = 1;

    const BeamElectrical& beam(BeamId b) const { return b == BeamId::upper ? upper : lower; }

    void validate() const {
        upper.validate("upper");
        lower.validate("lower");
        if (!(i_drive_A >= 0.0) || !std::isfinite(i_drive_A))
            throw ConfigError("measurement: i_drive_A must be >= 0");
        if (!(parasitic_tau_s > 0.0) || !std::isfinite(parasitic_tau_s))
            throw ConfigError("measurement: parasitic_tau_s must be > 0");
        if (!std::isfinite(parasitic_amplitude_V))
            throw ConfigError("measurement: parasitic_amplitude_V not finite");
        if (!(noise_rms_V >= 0.0) || !std::isfinite(noise_rms_V))
            throw ConfigError("measurement: noise_rms_V must be >= 0");
    }
};

inline double joule_power(double current_A, double resistance_ohm) {
    return current_A * current_A * resistance_ohm;
}

namespace detail {

/// Deterministic standard normal stream: fixed-width uniforms from
/// mt19937_64 through a Box-Muller map, independent of library internals.
class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : eng_(seed) {}

    double next() {
        const double u1 = 1.0 - to_unit(eng_()); // (0, 1]
        const double u2 = to_unit(eng_());
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static double to_unit(std::uint64_t r) {
        return static_cast<double>(r >> 11) * 0x1.0p-53; // [0, 1)
    }
    std::mt19937_64 eng_;
};

} // namespace detail

/// Voltage transient a tester would capture on one beam for a given
/// temperature transient: sensitivity times elevation, plus an exponential
/// switching artifact, plus gaussian noise. i_after_A is the current left
/// flowing through the beam during capture; zero current reads no thermal
/// signal at all.
inline TransientCurve synthesize_voltage(const TransientCurve& temp_curve,
                                         const MeasurementSetup& setup, BeamId beam,
                                         double i_after_A) {
    temp_curve.validate();
    setup.validate();
    if (temp_curve.kind != CurveKind::temperature)
        throw ConfigError("synthesize_voltage: input is not a temperature curve");
    if (!(i_after_A >= 0.0) || !std::isfinite(i_after_A))
        throw ConfigError("synthesize_voltage: i_after_A must be >= 0");

    const BeamElectrical& be = setup.beam(beam);
    const double sens = i_after_A * be.r_el0_ohm * be.alpha_per_K;

    TransientCurve out = temp_curve;
    out.kind = CurveKind::voltage;
    detail::GaussStream noise(mix64(setup.seed + static_cast<std::uint64_t>(beam) + 1));
    for (auto& s : out.samples) {
        double v = sens * s.value;
        v += setup.parasitic_amplitude_V * std::exp(-s.t / setup.parasitic_tau_s);
        if (setup.noise_rms_V > 0.0)
            v += setup.noise_rms_V * noise.next();
        s.value = v;
    }
    return out;
}

/// Full virtual measurement: heat with drive plus sense currents, switch the
/// drive off, capture one voltage transient per sensed beam. Beams outside
/// `sensed` carry no current. The heating currents self-consistently include
/// the sense currents, so a sensed beam is also slightly self-heated.
inline std::map<BeamId, TransientCurve> run_virtual_experiment(const ThermalNetwork& net,
                                                               const MeasurementSetup& setup,
                                                               BeamId drive,
                                                               const std::set<BeamId>& sensed,
                                                               const TransientGrid& grid = {}) {
    setup.validate();
    if (sensed.empty())
        throw ConfigError("run_virtual_experiment: no sensed beams");

    Eigen::VectorXd p_on = Eigen::VectorXd::Zero(net.size());
    Eigen::VectorXd p_off = Eigen::VectorXd::Zero(net.size());
    for (BeamId b : {BeamId::upper, BeamId::lower}) {
        const BeamElectrical& be = setup.beam(b);
        const double i_keep = sensed.count(b) ? be.i_sense_A : 0.0;
        const double i_on = i_keep + (b == drive ? setup.i_drive_A : 0.0);
        if (i_on == 0.0)
            continue;
        const auto& heater = net.taps(b).heater;
        if (heater.empty())
            throw ConfigError(std::string("run_virtual_experiment: network has no ") +
                              beam_name(b) + " heater nodes");
        p_on += distribute_power(net, heater, joule_power(i_on, be.r_el0_ohm));
        if (i_keep > 0.0)
            p_off += distribute_power(net, heater, joule_power(i_keep, be.r_el0_ohm));
    }

    auto temperature = transient_switch_off(net, p_on, p_off, grid);

    std::map<BeamId, TransientCurve> out;
    for (BeamId b : sensed) {
        auto it = temperature.find(b);
        if (it == temperature.end())
            throw ConfigError(std::string("run_virtual_experiment: network has no ") +
                              beam_name(b) + " sensor nodes");
        out[b] = synthesize_voltage(it->second, setup, b, setup.beam(b).i_sense_A);
    }
    return out;
}

} // namespace etchprobe
