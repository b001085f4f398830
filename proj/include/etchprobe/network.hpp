#pragma once

#include <queue>
#include <string>
#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/geometry.hpp"

namespace etchprobe {

enum class BeamId { upper, lower };

inline const char* beam_name(BeamId b) { return b == BeamId::upper ? "upper" : "lower"; }

inline BeamId beam_from_name(const std::string& s) {
    if (s == "upper")
        return BeamId::upper;
    if (s == "lower")
        return BeamId::lower;
    throw ConfigError("unknown beam '" + s + "', expected 'upper' or 'lower'");
}

struct ThermalNode {
    double capacitance = 0.0; // J/K
    Vec3 position{0.0, 0.0, 0.0};
    RegionRole role = RegionRole::fill;
};

struct ThermalEdge {
    int a = -1;
    int b = -1;
    double conductance = 0.0; // W/K
};

struct AmbientEdge {
    int node = -1;
    double conductance = 0.0;
};

/// Heater and sensing footprints of one beam, as node index sets. For these
/// resistor beams the two coincide, but they are kept separate on purpose.
struct BeamTaps {
    std::vector<int> heater;
    std::vector<int> sensor;
};

/// Lumped thermal RC network. AMBIENT is an implicit isothermal node at
/// ambient_K; all solved temperatures are relative to it. symmetry_factor
/// tells how many copies of this network the physical device consists of
/// (4 for a quarter model), so injected powers are divided by it.
struct ThermalNetwork {
    std::vector<ThermalNode> nodes;
    std::vector<ThermalEdge> edges;
    std::vector<AmbientEdge> ambient_edges;
    BeamTaps upper;
    BeamTaps lower;
    double ambient_K = 293.15;
    double symmetry_factor = 1.0;

    const BeamTaps& taps(BeamId b) const { return b == BeamId::upper ? upper : lower; }

    int size() const { return static_cast<int>(nodes.size()); }

    double total_capacitance() const {
        double c = 0.0;
        for (const auto& n : nodes)
            c += n.capacitance;
        return c;
    }

    void validate() const {
        const int n = size();
        if (n == 0)
            throw ConfigError("network has no nodes");
        for (const auto& node : nodes)
            if (!(node.capacitance > 0.0) || !std::isfinite(node.capacitance))
                throw ConfigError("network: node capacitance must be positive");
        auto check_index = [n](int i) {
            if (i < 0 || i >= n)
                throw ConfigError("network: node index out of range");
        };
        for (const auto& e : edges) {
            check_index(e.a);
            check_index(e.b);
            if (e.a == e.b)
                throw ConfigError("network: self edge");
            if (!(e.conductance > 0.0) || !std::isfinite(e.conductance))
                throw ConfigError("network: edge conductance must be positive");
        }
        for (const auto& e : ambient_edges) {
            check_index(e.node);
            if (!(e.conductance > 0.0) || !std::isfinite(e.conductance))
                throw ConfigError("network: ambient conductance must be positive");
        }
        for (const auto& taps : {&upper, &lower})
            for (const auto& set : {&taps->heater, &taps->sensor})
                for (int i : *set)
                    check_index(i);
        if (!(symmetry_factor >= 1.0))
            throw ConfigError("network: symmetry_factor must be >= 1");
        if (ambient_edges.empty())
            throw SolverError("network has no path to ambient");

        // Every node must reach AMBIENT, otherwise the steady problem is singular.
        std::vector<std::vector<int>> adj(n);
        for (const auto& e : edges) {
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
        }
        std::vector<char> seen(n, 0);
        std::queue<int> q;
        for (const auto& e : ambient_edges)
            if (!seen[e.node]) {
                seen[e.node] = 1;
                q.push(e.node);
            }
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
        }
        for (int i = 0; i < n; ++i)
            if (!seen[i])
                throw SolverError("network is not connected to ambient");
    }
};

/// Multiply every conductance (internal and ambient) by k, leaving the
/// capacitances alone. Divides all thermal resistances by k, which compresses
/// amplitudes and time constants by the same factor.
inline ThermalNetwork scale_conductances(ThermalNetwork net, double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw ConfigError("scale_conductances: factor must be positive");
    for (auto& e : net.edges)
        e.conductance *= k;
    for (auto& e : net.ambient_edges)
        e.conductance *= k;
    return net;
}

} // namespace etchprobe
