#ifndef TRIPOD_TRIPOD_HPP
#define TRIPOD_TRIPOD_HPP

// Umbrella header for the tripod dark-state simulator.

#include "tripod/errors.hpp"
#include "tripod/qmath.hpp"
#include "tripod/model.hpp"
#include "tripod/holonomy.hpp"
#include "tripod/dynamics.hpp"
#include "tripod/thermal.hpp"
#include "tripod/reconstruct.hpp"

#endif
