#pragma once

// Everything: geometry, fields, dynamics, orbits, X-ray, experiments, I/O.

#include "maglab/config.hpp"
#include "maglab/criteria.hpp"
#include "maglab/experiments.hpp"
#include "maglab/flow.hpp"
#include "maglab/loop.hpp"
#include "maglab/magnetic_system.hpp"
#include "maglab/report.hpp"
#include "maglab/shooting.hpp"
#include "maglab/spectrum.hpp"
#include "maglab/surface.hpp"
#include "maglab/xray.hpp"
