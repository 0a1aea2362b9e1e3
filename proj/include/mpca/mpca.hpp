#pragma once

#include "mpca/baselines.hpp"
#include "mpca/eigensolver.hpp"
#include "mpca/glram.hpp"
#include "mpca/linalg.hpp"
#include "mpca/random.hpp"
#include "mpca/simulator.hpp"
#include "mpca/types.hpp"
