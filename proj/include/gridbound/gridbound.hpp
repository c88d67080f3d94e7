#pragma once

// Umbrella header: certified interval bounds for security-constrained
// DC-OPF market clearing.

#include "gridbound/bound_engine.hpp"
#include "gridbound/contingency_ops.hpp"
#include "gridbound/cost_curves.hpp"
#include "gridbound/errors.hpp"
#include "gridbound/grid_model.hpp"
#include "gridbound/interval.hpp"
#include "gridbound/network_matrices.hpp"
#include "gridbound/oracle.hpp"
