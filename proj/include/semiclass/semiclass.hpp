#pragma once

#include "semiclass/config.hpp"
#include "semiclass/density.hpp"
#include "semiclass/eigensolve.hpp"
#include "semiclass/error.hpp"
#include "semiclass/experiments.hpp"
#include "semiclass/exponents.hpp"
#include "semiclass/grid.hpp"
#include "semiclass/operator.hpp"
#include "semiclass/potential.hpp"
#include "semiclass/quadrature.hpp"
#include "semiclass/quasimodes.hpp"
#include "semiclass/scaling.hpp"
#include "semiclass/specialfn.hpp"
#include "semiclass/weyl.hpp"
