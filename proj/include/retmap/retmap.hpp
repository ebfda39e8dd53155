#ifndef RETMAP_RETMAP_HPP_
#define RETMAP_RETMAP_HPP_

#include "retmap/errors.hpp"
#include "retmap/series.hpp"
#include "retmap/grid.hpp"
#include "retmap/v_series.hpp"
#include "retmap/fixed_point.hpp"
#include "retmap/return_map.hpp"
#include "retmap/dop853.hpp"
#include "retmap/ode_oracle.hpp"
#include "retmap/fit.hpp"

#endif  // RETMAP_RETMAP_HPP_
