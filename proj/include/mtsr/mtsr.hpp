// Convenience header pulling in the whole library.
#pragma once

#include "mtsr/analysis.hpp"
#include "mtsr/config.hpp"
#include "mtsr/dynamics.hpp"
#include "mtsr/io.hpp"
#include "mtsr/lattice.hpp"
#include "mtsr/random.hpp"
#include "mtsr/reduction.hpp"
#include "mtsr/simulation.hpp"
