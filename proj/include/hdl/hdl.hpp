#pragma once

#include "hdl/certify.hpp"
#include "hdl/conditions.hpp"
#include "hdl/densities.hpp"
#include "hdl/discrepancy.hpp"
#include "hdl/errors.hpp"
#include "hdl/evaluator.hpp"
#include "hdl/extended.hpp"
#include "hdl/integrate.hpp"
#include "hdl/lattice.hpp"
#include "hdl/pair.hpp"
#include "hdl/parallel.hpp"
#include "hdl/random.hpp"
#include "hdl/sievemle.hpp"
#include "hdl/special.hpp"
