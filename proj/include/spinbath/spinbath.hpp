#pragma once

#include "config.hpp"
#include "eigensolve.hpp"
#include "error.hpp"
#include "fitting.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "observables.hpp"
#include "propagator.hpp"
#include "simulation.hpp"
#include "spinspace.hpp"
#include "vector_ops.hpp"
