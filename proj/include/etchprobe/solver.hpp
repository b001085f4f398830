#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <map>
#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/curve.hpp"
#include "etchprobe/network.hpp"

namespace etchprobe {

/// Time stepping control for switch-off transients. Steps advance on a
/// geometric lattice from t_min with steps_per_decade intervals per decade,
/// each integrated with `substeps` equal backward Euler steps. t_max = 0 runs
/// until the response decays to 1e-4 of its initial value (10 s at most).
struct TransientGrid {
    double t_min = 1e-8;
    double t_max = 0.0;
    int steps_per_decade = 60;
    int substeps = 4;
    int samples_per_octave = 200;

    void validate() const {
        if (!(t_min > 0.0) || !std::isfinite(t_min))
            throw ConfigError("transient: t_min must be positive");
        if (t_max != 0.0 && (!(t_max > t_min) || !std::isfinite(t_max)))
            throw ConfigError("transient: t_max must be 0 (auto) or greater than t_min");
        if (steps_per_decade < 20)
            throw ConfigError("transient: steps_per_decade must be at least 20");
        if (substeps < 1)
            throw ConfigError("transient: substeps must be at least 1");
        if (samples_per_octave < 8)
            throw ConfigError("transient: samples_per_octave must be at least 8");
    }
};

inline Eigen::SparseMatrix<double> conductance_matrix(const ThermalNetwork& net) {
    const int n = net.size();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * net.edges.size() + net.ambient_edges.size());
    for (const auto& e : net.edges) {
        trips.emplace_back(e.a, e.a, e.conductance);
        trips.emplace_back(e.b, e.b, e.conductance);
        trips.emplace_back(e.a, e.b, -e.conductance);
        trips.emplace_back(e.b, e.a, -e.conductance);
    }
    for (const auto& e : net.ambient_edges)
        trips.emplace_back(e.node, e.node, e.conductance);
    Eigen::SparseMatrix<double> G(n, n);
    G.setFromTriplets(trips.begin(), trips.end());
    G.makeCompressed();
    return G;
}

inline Eigen::VectorXd capacitance_vector(const ThermalNetwork& net) {
    Eigen::VectorXd c(net.size());
    for (int i = 0; i < net.size(); ++i)
        c[i] = net.nodes[i].capacitance;
    return c;
}

/// Spread a total power over a node set, weighted by node capacitance so the
/// load is uniform per unit volume of a homogeneous heater. The symmetry
/// factor of the network is applied here: pass the power of the whole
/// physical device.
inline Eigen::VectorXd distribute_power(const ThermalNetwork& net, const std::vector<int>& set,
                                        double total_power) {
    if (set.empty())
        throw ConfigError("distribute_power: empty node set");
    if (!std::isfinite(total_power))
        throw ConfigError("distribute_power: power must be finite");
    double csum = 0.0;
    for (int i : set) {
        if (i < 0 || i >= net.size())
            throw ConfigError("distribute_power: node index out of range");
        csum += net.nodes[i].capacitance;
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(net.size());
    const double scaled = total_power / net.symmetry_factor;
    for (int i : set)
        p[i] += scaled * net.nodes[i].capacitance / csum;
    return p;
}

/// Temperature elevation over ambient for a constant power vector.
/// Conservation holds to solver precision: sum of ambient-edge heat flows
/// equals the injected power.
inline Eigen::VectorXd steady_state(const ThermalNetwork& net, const Eigen::VectorXd& power) {
    net.validate();
    if (power.size() != net.size())
        throw ConfigError("steady_state: power vector size mismatch");
    if (!power.allFinite())
        throw SolverError("steady_state: non-finite power");
    const double pnorm = power.norm();
    if (pnorm == 0.0)
        return Eigen::VectorXd::Zero(net.size());

    const auto G = conductance_matrix(net);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(G);
    if (llt.info() != Eigen::Success)
        throw SolverError("steady_state: factorization failed");
    Eigen::VectorXd x = llt.solve(power);
    Eigen::VectorXd r = power - G * x;
    if (r.norm() > 1e-10 * pnorm) {
        x += llt.solve(r); // one step of iterative refinement
        r = power - G * x;
        if (r.norm() > 1e-10 * pnorm)
            throw SolverError("steady_state: residual tolerance not met");
    }
    return x;
}

inline double average_over(const Eigen::VectorXd& field, const std::vector<int>& set) {
    if (set.empty())
        throw ConfigError("average_over: empty node set");
    double s = 0.0;
    for (int i : set)
        s += field[i];
    return s / static_cast<double>(set.size());
}

/// Index of the hottest node; the lowest index wins ties, so a uniform field
/// reports node 0.
inline int hotspot_location(const Eigen::VectorXd& field) {
    if (field.size() == 0)
        throw ConfigError("hotspot_location: empty field");
    int best = 0;
    for (int i = 1; i < field.size(); ++i)
        if (field[i] > field[best])
            best = i;
    return best;
}

/// Thermal resistance seen by a heater: average heater elevation per watt of
/// injected device power.
inline double driving_point_rth(const ThermalNetwork& net, const std::vector<int>& heater,
                                double probe_power = 1e-3) {
    if (!(probe_power > 0.0))
        throw ConfigError("driving_point_rth: probe power must be positive");
    const auto field = steady_state(net, distribute_power(net, heater, probe_power));
    return average_over(field, heater) / probe_power;
}

/// Switch-off transient: start from the steady state under power_on, then
/// integrate the decay toward the steady state under power_off. Returns the
/// average elevation of each non-empty sensor set relative to its final
/// value, resampled onto a log-uniform lattice.
inline std::map<BeamId, TransientCurve> transient_switch_off(const ThermalNetwork& net,
                                                             const Eigen::VectorXd& power_on,
                                                             const Eigen::VectorXd& power_off,
                                                             const TransientGrid& grid = {}) {
    grid.validate();
    net.validate();
    if (power_on.size() != net.size() || power_off.size() != net.size())
        throw ConfigError("transient_switch_off: power vector size mismatch");
    if (!power_on.allFinite() || !power_off.allFinite())
        throw SolverError("transient_switch_off: non-finite power");

    const Eigen::VectorXd x0 = steady_state(net, power_on);
    const Eigen::VectorXd xinf = steady_state(net, power_off);

    std::vector<std::pair<BeamId, const std::vector<int>*>> monitored;
    if (!net.upper.sensor.empty())
        monitored.emplace_back(BeamId::upper, &net.upper.sensor);
    if (!net.lower.sensor.empty())
        monitored.emplace_back(BeamId::lower, &net.lower.sensor);
    if (monitored.empty())
        throw ConfigError("transient_switch_off: no sensor nodes to record");

    std::vector<double> base(monitored.size());
    double dev0 = 0.0;
    for (std::size_t m = 0; m < monitored.size(); ++m) {
        base[m] = average_over(xinf, *monitored[m].second);
        dev0 = std::max(dev0, std::abs(average_over(x0, *monitored[m].second) - base[m]));
    }

    const auto G = conductance_matrix(net);
    const Eigen::VectorXd c = capacitance_vector(net);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    llt.analyzePattern(G);

    const double cap_time = 10.0;
    // A flat response (equal powers) ends after one decade instead of never
    // crossing a zero threshold.
    const double stop_level =
        dev0 > 0.0 ? 1e-4 * dev0 : std::numeric_limits<double>::infinity();
    const double ratio = std::pow(10.0, 1.0 / grid.steps_per_decade);
    const double t_end = grid.t_max > 0.0 ? grid.t_max : cap_time;

    Eigen::VectorXd x = x0;
    Eigen::VectorXd rhs(net.size());
    std::vector<std::vector<Sample>> recorded(monitored.size());

    double t_cur = 0.0;
    double t_next = grid.t_min;
    while (true) {
        const double h = (t_next - t_cur) / grid.substeps;
        Eigen::SparseMatrix<double> M = G;
        for (int i = 0; i < net.size(); ++i)
            M.coeffRef(i, i) += c[i] / h;
        llt.factorize(M);
        if (llt.info() != Eigen::Success)
            throw SolverError("transient_switch_off: factorization failed");
        for (int s = 0; s < grid.substeps; ++s) {
            // The right-hand side must not alias x: the solve permutes its
            // input in place, so feeding it an expression over x scrambles
            // the state.
            rhs = (c / h).cwiseProduct(x) + power_off;
            x = llt.solve(rhs);
        }
        if (!x.allFinite())
            throw SolverError("transient_switch_off: state diverged");

        double dev = 0.0;
        for (std::size_t m = 0; m < monitored.size(); ++m) {
            const double v = average_over(x, *monitored[m].second) - base[m];
            recorded[m].push_back({t_next, v});
            dev = std::max(dev, std::abs(v));
        }

        if (grid.t_max > 0.0) {
            if (t_next >= grid.t_max * (1.0 - 1e-12))
                break;
        } else if (t_next >= cap_time || (t_next >= 10.0 * grid.t_min && dev <= stop_level)) {
            break;
        }
        t_cur = t_next;
        t_next = std::min(t_cur * ratio, t_end);
    }

    std::map<BeamId, TransientCurve> out;
    for (std::size_t m = 0; m < monitored.size(); ++m) {
        TransientCurve curve;
        curve.kind = CurveKind::temperature;
        curve.samples = std::move(recorded[m]);
        out[monitored[m].first] = resample_log(curve, grid.samples_per_octave);
    }
    return out;
}

} // namespace etchprobe
