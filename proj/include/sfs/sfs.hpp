#pragma once

#include "sfs/commands.hpp"
#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/hj_core.hpp"
#include "sfs/io.hpp"
#include "sfs/metrics.hpp"
#include "sfs/parallel.hpp"
#include "sfs/reflectance.hpp"
#include "sfs/scenes.hpp"
#include "sfs/solver.hpp"
#include "sfs/vec.hpp"
