#pragma once

// Umbrella header: Agler decompositions of two-variable rational inner
// functions, compressed shifts on bidisk model spaces, and the commutator
// rank / reducing-subspace analyses built on them.

#include "agler.hpp"
#include "analysis.hpp"
#include "bipoly.hpp"
#include "errors.hpp"
#include "inner_function.hpp"
#include "json_io.hpp"
#include "random.hpp"
#include "reducing.hpp"
#include "shift_operator.hpp"
#include "torus_grid.hpp"
