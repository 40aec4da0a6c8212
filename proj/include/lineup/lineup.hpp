#pragma once

#include "lineup/constraints.hpp"
#include "lineup/decimal.hpp"
#include "lineup/error.hpp"
#include "lineup/qubo.hpp"
#include "lineup/roster.hpp"
#include "lineup/solvers.hpp"
#include "lineup/verify.hpp"
