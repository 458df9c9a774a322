#pragma once

#include "ising_market/config.hpp"
#include "ising_market/config_io.hpp"
#include "ising_market/csv.hpp"
#include "ising_market/dynamics.hpp"
#include "ising_market/error.hpp"
#include "ising_market/observables.hpp"
#include "ising_market/random.hpp"
#include "ising_market/simulation.hpp"
#include "ising_market/spin_grid.hpp"
