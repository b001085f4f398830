#pragma once

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/materials.hpp"

namespace etchprobe {

enum class RegionRole {
    substrate,
    nitride,
    lower_anchor,
    upper_anchor,
    lower_beam,
    upper_beam,
    etch_gap,
    fill,
};

/// One axis-aligned homogeneous block. A region without material is void
/// (vacuum) and produces no mesh cells. Regions of a device tile its bounding
/// box exactly, without overlap.
struct Region {
    Box3 box;
    std::optional<Material> material;
    RegionRole role = RegionRole::fill;
    double psg_fraction = 0.0; // volume fraction of sacrificial glass left here
};

/// Stacked two-beam resonator on a substrate. x runs along the beams, z up.
/// Both beams are centered on the origin; the lower beam sits on anchor posts
/// above the passivation, the longer upper beam is anchored outboard of them
/// and crosses over the lower beam. Lengths in meters, temperatures in kelvin.
struct ResonatorParams {
    double substrate_length = 380e-6;
    double substrate_width = 100e-6;
    double substrate_thickness = 50e-6;
    double nitride_thickness = 0.6e-6;

    double lower_beam_length = 240e-6;
    double lower_beam_width = 20e-6;
    double lower_beam_thickness = 2.0e-6;

    double upper_beam_length = 300e-6;
    double upper_beam_width = 20e-6;
    double upper_beam_thickness = 1.5e-6;

    double gap1 = 2.0e-6;  // sacrificial gap between passivation and lower beam
    double gap2 = 0.75e-6; // sacrificial gap between the two beams

    double overlap_length = 160e-6; // centered span where the gaps held glass
    double anchor_length = 20e-6;   // anchor pad size along the beam axis

    double ambient_K = 293.15;

    std::string substrate_material = "silicon";
    std::string nitride_material = "nitride";
    std::string beam_material = "polysilicon";
    std::string psg_material = "psg";
    std::string gap_fill = "vacuum"; // medium in etched gaps: "vacuum" or a material

    void validate() const {
        auto positive = [](double v, const char* what) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ConfigError(std::string("geometry: ") + what + " must be positive");
        };
        positive(substrate_length, "substrate_length");
        positive(substrate_width, "substrate_width");
        positive(substrate_thickness, "substrate_thickness");
        positive(nitride_thickness, "nitride_thickness");
        positive(lower_beam_length, "lower_beam_length");
        positive(lower_beam_width, "lower_beam_width");
        positive(lower_beam_thickness, "lower_beam_thickness");
        positive(upper_beam_length, "upper_beam_length");
        positive(upper_beam_width, "upper_beam_width");
        positive(upper_beam_thickness, "upper_beam_thickness");
        positive(gap1, "gap1");
        positive(gap2, "gap2");
        positive(overlap_length, "overlap_length");
        positive(anchor_length, "anchor_length");
        if (!(ambient_K > 0.0))
            throw ConfigError("geometry: ambient_K must be positive");

        if (overlap_length > std::min(lower_beam_length, upper_beam_length))
            throw ConfigError("geometry: overlap_length exceeds a beam length");
        if (upper_beam_length < lower_beam_length + 2.0 * anchor_length)
            throw ConfigError("geometry: upper beam too short, its anchors would land "
                              "on the lower beam");
        if (upper_beam_length + 2.0 * anchor_length > substrate_length ||
            lower_beam_length + 2.0 * anchor_length > substrate_length)
            throw ConfigError("geometry: beam plus anchors exceeds substrate_length");
        if (std::max(lower_beam_width, upper_beam_width) > substrate_width)
            throw ConfigError("geometry: beam width exceeds substrate_width");
    }
};

struct DeviceGeometry {
    ResonatorParams params;
    MaterialTable materials;
    double etch_fraction = 0.0;
    std::vector<Region> regions;
    Box3 bounds;
    bool mirror_x = false; // true once reduced to x >= 0 half
    bool mirror_y = false;

    double ambient_K() const { return params.ambient_K; }

    /// Volume of sacrificial glass still present, counting partial regions
    /// by their glass fraction.
    double psg_volume() const {
        double v = 0.0;
        for (const auto& r : regions)
            v += r.psg_fraction * r.box.volume();
        return v;
    }

    double region_volume_total() const {
        double v = 0.0;
        for (const auto& r : regions)
            v += r.box.volume();
        return v;
    }
};

namespace detail {

struct Rect2 {
    double x0, x1, y0, y1;
};

/// Complement of disjoint inner rectangles within an outer rectangle,
/// as rectangles. Inner bounds must lie on the produced strip ticks, which
/// holds because the ticks are taken from the inner bounds themselves.
inline std::vector<Rect2> rect_complement(const Rect2& outer,
                                          const std::vector<Rect2>& inners) {
    std::vector<double> xs = {outer.x0, outer.x1};
    for (const auto& r : inners) {
        xs.push_back(std::clamp(r.x0, outer.x0, outer.x1));
        xs.push_back(std::clamp(r.x1, outer.x0, outer.x1));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<Rect2> out;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double sx0 = xs[i], sx1 = xs[i + 1];
        if (!(sx1 > sx0))
            continue;
        const double mid = 0.5 * (sx0 + sx1);
        std::vector<std::pair<double, double>> covered;
        for (const auto& r : inners)
            if (r.x0 < mid && mid < r.x1)
                covered.emplace_back(std::max(r.y0, outer.y0), std::min(r.y1, outer.y1));
        std::sort(covered.begin(), covered.end());
        double y = outer.y0;
        for (const auto& [cy0, cy1] : covered) {
            if (cy0 > y)
                out.push_back({sx0, sx1, y, cy0});
            y = std::max(y, cy1);
        }
        if (y < outer.y1)
            out.push_back({sx0, sx1, y, outer.y1});
    }
    return out;
}

} // namespace detail

/// Build the full device for a given remaining glass fraction f in [0, 1].
/// f = 1 reproduces the unreleased stack, f = 0 a complete release. Partial
/// release keeps a gap-bridging residue across the overlap span, modeled as a
/// volume-weighted mix of glass and gap medium so that the glass volume stays
/// exactly f times the original gap volume.
inline DeviceGeometry build_resonator(const ResonatorParams& params, double etch_fraction,
                                      const MaterialTable& table = default_material_table()) {
    params.validate();
    if (!(etch_fraction >= 0.0 && etch_fraction <= 1.0))
        throw ConfigError("etch_fraction must be in [0, 1]");

    const Material substrate = table.lookup(params.substrate_material);
    const Material nitride = table.lookup(params.nitride_material);
    const Material poly = table.lookup(params.beam_material);
    const Material psg = table.lookup(params.psg_material);

    std::optional<Material> fill;
    if (params.gap_fill != "vacuum")
        fill = table.lookup(params.gap_fill);

    // Residue in the gaps: f parts glass, (1 - f) parts gap medium by volume.
    const double f = etch_fraction;
    std::optional<Material> residue;
    if (f > 0.0 || fill) {
        Material m;
        m.name = "psg_residue";
        m.conductivity = f * psg.conductivity + (1.0 - f) * (fill ? fill->conductivity : 0.0);
        m.volumetric_heat_capacity =
            f * psg.volumetric_heat_capacity +
            (1.0 - f) * (fill ? fill->volumetric_heat_capacity : 0.0);
        m.validate();
        residue = m;
    }

    const auto& p = params;
    const double z0 = 0.0;
    const double z1 = p.substrate_thickness;
    const double z2 = z1 + p.nitride_thickness;
    const double z3 = z2 + p.gap1;
    const double z4 = z3 + p.lower_beam_thickness;
    const double z5 = z4 + p.gap2;
    const double z6 = z5 + p.upper_beam_thickness;

    const double xs = 0.5 * p.substrate_length;
    const double ys = 0.5 * p.substrate_width;
    const double xl = 0.5 * p.lower_beam_length;
    const double xu = 0.5 * p.upper_beam_length;
    const double yl = 0.5 * p.lower_beam_width;
    const double yu = 0.5 * p.upper_beam_width;
    const double xo = 0.5 * p.overlap_length;
    const double a = p.anchor_length;
    const double yo = std::min(yl, yu); // residue between the beams

    DeviceGeometry g;
    g.params = params;
    g.materials = table;
    g.etch_fraction = f;
    g.bounds = {{-xs, -ys, z0}, {xs, ys, z6}};

    auto add = [&](double bx0, double bx1, double by0, double by1, double bz0, double bz1,
                   std::optional<Material> m, RegionRole role, double glass = 0.0) {
        Region r;
        r.box = {{bx0, by0, bz0}, {bx1, by1, bz1}};
        r.material = std::move(m);
        r.role = role;
        r.psg_fraction = glass;
        g.regions.push_back(std::move(r));
    };

    add(-xs, xs, -ys, ys, z0, z1, substrate, RegionRole::substrate);
    add(-xs, xs, -ys, ys, z1, z2, nitride, RegionRole::nitride);

    // Anchors: lower posts span gap1 plus the pad at beam level; upper posts
    // rise through every level up to the top of the upper beam.
    for (double s : {-1.0, 1.0}) {
        const double ax0 = std::min(s * xl, s * (xl + a));
        const double ax1 = std::max(s * xl, s * (xl + a));
        add(ax0, ax1, -yl, yl, z2, z4, poly, RegionRole::lower_anchor);
        const double ux0 = std::min(s * xu, s * (xu + a));
        const double ux1 = std::max(s * xu, s * (xu + a));
        add(ux0, ux1, -yu, yu, z2, z6, poly, RegionRole::upper_anchor);
    }

    add(-xl, xl, -yl, yl, z3, z4, poly, RegionRole::lower_beam);
    add(-xu, xu, -yu, yu, z5, z6, poly, RegionRole::upper_beam);

    // Gap residue across the overlap span, bridging each gap in full height.
    add(-xo, xo, -yl, yl, z2, z3, residue, RegionRole::etch_gap, f);
    add(-xo, xo, -yo, yo, z4, z5, residue, RegionRole::etch_gap, f);

    // Whatever is left of each suspended level becomes gap medium.
    struct Slab {
        double zlo, zhi;
        std::vector<detail::Rect2> solids;
    };
    const std::vector<Slab> slabs = {
        {z2, z3,
         {{-xl - a, -xl, -yl, yl},
          {xl, xl + a, -yl, yl},
          {-xu - a, -xu, -yu, yu},
          {xu, xu + a, -yu, yu},
          {-xo, xo, -yl, yl}}},
        {z3, z4,
         {{-xl - a, xl + a, -yl, yl},
          {-xu - a, -xu, -yu, yu},
          {xu, xu + a, -yu, yu}}},
        {z4, z5,
         {{-xu - a, -xu, -yu, yu}, {xu, xu + a, -yu, yu}, {-xo, xo, -yo, yo}}},
        {z5, z6, {{-xu - a, xu + a, -yu, yu}}},
    };
    for (const auto& slab : slabs) {
        const auto rest = detail::rect_complement({-xs, xs, -ys, ys}, slab.solids);
        for (const auto& r : rest)
            add(r.x0, r.x1, r.y0, r.y1, slab.zlo, slab.zhi, fill, RegionRole::fill);
    }

    // Tiling self check: regions must account for the box exactly.
    if (!nearly_equal(g.region_volume_total(), g.bounds.volume(), 1e-9))
        throw std::logic_error("resonator regions do not tile the bounding box");

    return g;
}

namespace detail {

inline bool same_region_kind(const Region& a, const Region& b) {
    const bool mat_match =
        (!a.material && !b.material) ||
        (a.material && b.material && a.material->name == b.material->name &&
         a.material->conductivity == b.material->conductivity &&
         a.material->volumetric_heat_capacity == b.material->volumetric_heat_capacity);
    return mat_match && a.role == b.role && a.psg_fraction == b.psg_fraction;
}

inline bool has_mirrored_twin(const DeviceGeometry& g, const Region& r, int axis) {
    const double scale = std::max(std::abs(g.bounds.lo[axis]), std::abs(g.bounds.hi[axis]));
    for (const auto& c : g.regions) {
        if (!same_region_kind(r, c))
            continue;
        bool match = true;
        for (int k = 0; k < 3; ++k) {
            const double lo = (k == axis) ? -r.box.hi[k] : r.box.lo[k];
            const double hi = (k == axis) ? -r.box.lo[k] : r.box.hi[k];
            if (!nearly_equal(c.box.lo[k], lo, 1e-12, 1e-12 * scale) ||
                !nearly_equal(c.box.hi[k], hi, 1e-12, 1e-12 * scale)) {
                match = false;
                break;
            }
        }
        if (match)
            return true;
    }
    return false;
}

} // namespace detail

inline bool is_mirror_symmetric(const DeviceGeometry& g, int axis) {
    for (const auto& r : g.regions)
        if (!detail::has_mirrored_twin(g, r, axis))
            return false;
    return true;
}

/// Reduce a symmetric device to its x >= 0, y >= 0 quarter. The cut planes
/// become adiabatic mirror planes and results scale by the symmetry factor.
inline DeviceGeometry quarter_model(const DeviceGeometry& full) {
    if (full.mirror_x || full.mirror_y)
        throw ConfigError("quarter_model: geometry is already reduced");
    if (!is_mirror_symmetric(full, 0) || !is_mirror_symmetric(full, 1))
        throw ConfigError("quarter_model requires a mirror symmetric device");

    DeviceGeometry q = full;
    q.regions.clear();
    for (Region r : full.regions) {
        r.box = r.box.clipped(0, 0.0).clipped(1, 0.0);
        if (!r.box.empty())
            q.regions.push_back(std::move(r));
    }
    q.bounds = full.bounds.clipped(0, 0.0).clipped(1, 0.0);
    q.mirror_x = true;
    q.mirror_y = true;
    return q;
}

/// Rebuild the same device with a different remaining glass fraction. All
/// non-gap regions come out identical; a reduced model stays reduced.
inline DeviceGeometry set_etch_state(const DeviceGeometry& g, double etch_fraction) {
    DeviceGeometry next = build_resonator(g.params, etch_fraction, g.materials);
    if (g.mirror_x || g.mirror_y)
        next = quarter_model(next);
    return next;
}

} // namespace etchprobe
