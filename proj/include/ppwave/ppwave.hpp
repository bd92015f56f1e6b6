// ppwave: umbrella header.

#ifndef PPWAVE_PPWAVE_HPP_
#define PPWAVE_PPWAVE_HPP_

#include "ppwave/common.hpp"
#include "ppwave/spacetimes.hpp"
#include "ppwave/timefunctions.hpp"
#include "ppwave/geodesics.hpp"
#include "ppwave/reachability.hpp"
#include "ppwave/io.hpp"
#include "ppwave/acceptance.hpp"
#include "ppwave/experiments.hpp"

#endif  // PPWAVE_PPWAVE_HPP_
