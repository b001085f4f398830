#pragma once

// Umbrella header for the whole toolkit.

#include "etchprobe/analysis.hpp"
#include "etchprobe/calibration.hpp"
#include "etchprobe/classifier.hpp"
#include "etchprobe/common.hpp"
#include "etchprobe/config.hpp"
#include "etchprobe/curve.hpp"
#include "etchprobe/curve_io.hpp"
#include "etchprobe/geometry.hpp"
#include "etchprobe/instrument.hpp"
#include "etchprobe/materials.hpp"
#include "etchprobe/mesh.hpp"
#include "etchprobe/network.hpp"
#include "etchprobe/solver.hpp"
