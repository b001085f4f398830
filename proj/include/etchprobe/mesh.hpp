#pragma once

#include <algorithm>
#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/geometry.hpp"
#include "etchprobe/network.hpp"

namespace etchprobe {

struct MeshOptions {
    Vec3 cell_size{5e-6, 5e-6, 10e-6}; // target cell edge per axis, meters
    double film_coefficient = 0.0;     // W/(m^2 K) on outer faces, 0 = adiabatic

    void validate() const {
        for (double s : cell_size)
            if (!(s > 0.0) || !std::isfinite(s))
                throw ConfigError("mesh: cell_size entries must be positive");
        if (!(film_coefficient >= 0.0) || !std::isfinite(film_coefficient))
            throw ConfigError("mesh: film_coefficient must be >= 0");
    }
};

namespace detail {

/// Grid ticks along one axis: every region boundary is a tick, and each span
/// between boundaries is subdivided into equal cells no wider than `target`.
/// Cells therefore never straddle a material boundary and per-region volumes
/// are reproduced exactly at any resolution.
inline std::vector<double> axis_ticks(const DeviceGeometry& g, int axis, double target) {
    std::vector<double> ticks = {g.bounds.lo[axis], g.bounds.hi[axis]};
    for (const auto& r : g.regions) {
        ticks.push_back(r.box.lo[axis]);
        ticks.push_back(r.box.hi[axis]);
    }
    if (g.bounds.lo[axis] < 0.0 && g.bounds.hi[axis] > 0.0)
        ticks.push_back(0.0); // keep full and quarter grids face-aligned
    std::sort(ticks.begin(), ticks.end());

    const double span_all = g.bounds.extent(axis);
    std::vector<double> cuts;
    for (double t : ticks)
        if (cuts.empty() || t - cuts.back() > 1e-9 * span_all)
            cuts.push_back(t);

    std::vector<double> out;
    out.push_back(cuts.front());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        const double span = hi - lo;
        const int m = std::max(1, static_cast<int>(std::ceil(span / target - 1e-9)));
        for (int k = 1; k < m; ++k)
            out.push_back(lo + span * k / m);
        out.push_back(hi);
    }
    return out;
}

} // namespace detail

/// Turn a device into a thermal RC network on a boundary aligned tensor grid.
/// Node capacitance is rho*c*V of the cell; face conductance between cells is
/// the series combination of the two half cells, A / (d1/(2 k1) + d2/(2 k2)).
/// The substrate bottom couples to the isothermal ambient through its half
/// cell; mirror cut planes are adiabatic; other outer faces get the film
/// coefficient (default adiabatic). Void cells produce no nodes.
inline ThermalNetwork discretize(const DeviceGeometry& g, const MeshOptions& options = {}) {
    options.validate();
    if (g.regions.empty())
        throw ConfigError("discretize: geometry has no regions");

    const auto tx = detail::axis_ticks(g, 0, options.cell_size[0]);
    const auto ty = detail::axis_ticks(g, 1, options.cell_size[1]);
    const auto tz = detail::axis_ticks(g, 2, options.cell_size[2]);
    const int nx = static_cast<int>(tx.size()) - 1;
    const int ny = static_cast<int>(ty.size()) - 1;
    const int nz = static_cast<int>(tz.size()) - 1;
    if (nx < 1 || ny < 1 || nz < 1)
        throw ConfigError("discretize: degenerate geometry extent");

    // Bucket regions per z interval so the per-cell scan stays short.
    std::vector<std::vector<const Region*>> by_layer(nz);
    for (int iz = 0; iz < nz; ++iz) {
        const double zc = 0.5 * (tz[iz] + tz[iz + 1]);
        for (const auto& r : g.regions)
            if (zc >= r.box.lo[2] && zc < r.box.hi[2])
                by_layer[iz].push_back(&r);
    }

    ThermalNetwork net;
    net.ambient_K = g.ambient_K();
    net.symmetry_factor = (g.mirror_x ? 2.0 : 1.0) * (g.mirror_y ? 2.0 : 1.0);

    std::vector<int> cell_node(static_cast<std::size_t>(nx) * ny * nz, -1);
    std::vector<const Region*> cell_region(cell_node.size(), nullptr);
    auto flat = [&](int ix, int iy, int iz) {
        return (static_cast<std::size_t>(iz) * ny + iy) * nx + ix;
    };

    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const Vec3 c = {0.5 * (tx[ix] + tx[ix + 1]), 0.5 * (ty[iy] + ty[iy + 1]),
                                0.5 * (tz[iz] + tz[iz + 1])};
                const Region* hit = nullptr;
                for (const Region* r : by_layer[iz])
                    if (r->box.contains(c)) {
                        hit = r;
                        break;
                    }
                if (!hit)
                    throw std::logic_error("discretize: cell center outside all regions");
                if (!hit->material)
                    continue; // void
                const double vol = (tx[ix + 1] - tx[ix]) * (ty[iy + 1] - ty[iy]) *
                                   (tz[iz + 1] - tz[iz]);
                ThermalNode node;
                node.capacitance = hit->material->volumetric_heat_capacity * vol;
                node.position = c;
                node.role = hit->role;
                const int id = net.size();
                net.nodes.push_back(node);
                cell_node[flat(ix, iy, iz)] = id;
                cell_region[flat(ix, iy, iz)] = hit;

                if (hit->role == RegionRole::upper_beam) {
                    net.upper.heater.push_back(id);
                    net.upper.sensor.push_back(id);
                } else if (hit->role == RegionRole::lower_beam) {
                    net.lower.heater.push_back(id);
                    net.lower.sensor.push_back(id);
                }
            }
        }
    }
    if (net.nodes.empty())
        throw ConfigError("discretize: geometry contains no material");

    auto extent = [&](const std::vector<double>& t, int i) { return t[i + 1] - t[i]; };

    // Internal faces.
    for (int iz = 0; iz < nz; ++iz) {
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const int a = cell_node[flat(ix, iy, iz)];
                if (a < 0)
                    continue;
                const double ka = cell_region[flat(ix, iy, iz)]->material->conductivity;
                const double dx = extent(tx, ix), dy = extent(ty, iy), dz = extent(tz, iz);

                struct Nb {
                    int ix, iy, iz;
                    double area, da;
                };
                const Nb nbs[3] = {
                    {ix + 1, iy, iz, dy * dz, dx},
                    {ix, iy + 1, iz, dx * dz, dy},
                    {ix, iy, iz + 1, dx * dy, dz},
                };
                for (int d = 0; d < 3; ++d) {
                    const auto& nb = nbs[d];
                    if (nb.ix >= nx || nb.iy >= ny || nb.iz >= nz)
                        continue;
                    const int b = cell_node[flat(nb.ix, nb.iy, nb.iz)];
                    if (b < 0)
                        continue;
                    const double kb = cell_region[flat(nb.ix, nb.iy, nb.iz)]->material->conductivity;
                    const double db =
                        d == 0 ? extent(tx, nb.ix) : (d == 1 ? extent(ty, nb.iy) : extent(tz, nb.iz));
                    const double gcond = nb.area / (nb.da / (2.0 * ka) + db / (2.0 * kb));
                    net.edges.push_back({a, b, gcond});
                }

                // Substrate bottom face: isothermal ambient through the half cell.
                if (iz == 0)
                    net.ambient_edges.push_back({a, 2.0 * ka * dx * dy / dz});

                // Optional film on the remaining outer surfaces. Mirror cut
                // planes stay adiabatic, as do faces against internal voids.
                if (options.film_coefficient > 0.0) {
                    auto film = [&](double area) {
                        net.ambient_edges.push_back({a, options.film_coefficient * area});
                    };
                    if (ix == 0 && !g.mirror_x)
                        film(dy * dz);
                    if (ix == nx - 1)
                        film(dy * dz);
                    if (iy == 0 && !g.mirror_y)
                        film(dx * dz);
                    if (iy == ny - 1)
                        film(dx * dz);
                    if (iz == nz - 1)
                        film(dx * dy);
                }
            }
        }
    }

    net.validate();
    return net;
}

} // namespace etchprobe
