#pragma once

#include "rcc/errors.hpp"
#include "rcc/units.hpp"
#include "rcc/matrix.hpp"
#include "rcc/scenario.hpp"
#include "rcc/model.hpp"
#include "rcc/fp_solver.hpp"
#include "rcc/oracle.hpp"
#include "rcc/experiments.hpp"
