#pragma once

#include <map>
#include <string>

#include "etchprobe/common.hpp"

namespace etchprobe {

/// Isotropic bulk material. SI units throughout: W/(m*K) and J/(m^3*K).
struct Material {
    std::string name;
    double conductivity = 0.0;
    double volumetric_heat_capacity = 0.0;

    void validate() const {
        if (name.empty())
            throw ConfigError("material has no name");
        if (!(conductivity > 0.0) || !std::isfinite(conductivity))
            throw ConfigError("material '" + name + "': conductivity must be positive");
        if (!(volumetric_heat_capacity > 0.0) || !std::isfinite(volumetric_heat_capacity))
            throw ConfigError("material '" + name +
                              "': volumetric heat capacity must be positive");
    }
};

/// Name keyed material collection. Lookup of an unknown name is an error;
/// "vacuum" is reserved for the absence of material and is never stored here.
class MaterialTable {
public:
    void set(Material m) {
        m.validate();
        if (m.name == "vacuum")
            throw ConfigError("'vacuum' is reserved and cannot be redefined");
        table_[m.name] = std::move(m);
    }

    const Material& lookup(const std::string& name) const {
        auto it = table_.find(name);
        if (it == table_.end())
            throw ConfigError("unknown material '" + name + "'");
        return it->second;
    }

    bool contains(const std::string& name) const { return table_.count(name) != 0; }

private:
    std::map<std::string, Material> table_;
};

/// Room temperature handbook values for the usual surface micromachining stack.
inline MaterialTable default_material_table() {
    MaterialTable t;
    t.set({"silicon", 148.0, 1.63e6});
    t.set({"polysilicon", 30.0, 1.63e6});
    t.set({"psg", 1.1, 1.6e6});       // phosphosilicate glass, close to thermal oxide
    t.set({"nitride", 16.0, 2.2e6});  // LPCVD silicon nitride
    t.set({"gold", 317.0, 2.49e6});
    t.set({"air", 0.026, 1.2e3});
    return t;
}

} // namespace etchprobe
