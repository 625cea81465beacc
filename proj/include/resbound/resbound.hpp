#pragma once

#include "resbound/error.hpp"
#include "resbound/expr.hpp"
#include "resbound/grid.hpp"
#include "resbound/inverse_operator.hpp"
#include "resbound/roots.hpp"
#include "resbound/residual.hpp"
#include "resbound/ode_bounds.hpp"
#include "resbound/system_bounds.hpp"
#include "resbound/nonlinear_bounds.hpp"
#include "resbound/pde_bounds.hpp"
#include "resbound/problem_io.hpp"
#include "resbound/oracle/integrators.hpp"
#include "resbound/oracle/catalog.hpp"
#include "resbound/oracle/verify.hpp"
