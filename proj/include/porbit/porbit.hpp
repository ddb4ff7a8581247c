#pragma once

#include "porbit/action.hpp"
#include "porbit/error.hpp"
#include "porbit/loop_space.hpp"
#include "porbit/orbit_io.hpp"
#include "porbit/potentials.hpp"
#include "porbit/reconstruct.hpp"
#include "porbit/run_config.hpp"
#include "porbit/solver.hpp"
#include "porbit/system.hpp"
