#pragma once

#include "gridseer/core.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/linalg.hpp"
#include "gridseer/estimator.hpp"
#include "gridseer/max_flow.hpp"
#include "gridseer/observability.hpp"
#include "gridseer/lp.hpp"
#include "gridseer/milp.hpp"
#include "gridseer/protection.hpp"
#include "gridseer/attack.hpp"
#include "gridseer/commands.hpp"
