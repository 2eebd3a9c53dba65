#pragma once

// Umbrella header for the whole library.

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/functions.hpp"
#include "minres/indexcomb.hpp"
#include "minres/kernel_io.hpp"
#include "minres/kernels.hpp"
#include "minres/pipeline.hpp"
#include "minres/reference_data.hpp"
#include "minres/regression.hpp"
#include "minres/sdp_model.hpp"
#include "minres/sdp_problem.hpp"
#include "minres/sdp_solver.hpp"
#include "minres/symmetry.hpp"
