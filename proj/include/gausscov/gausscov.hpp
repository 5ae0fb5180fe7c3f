#pragma once

#include "gausscov/error.hpp"
#include "gausscov/data_matrix.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalue.hpp"
#include "gausscov/residual_state.hpp"
#include "gausscov/subset_space.hpp"
#include "gausscov/select.hpp"
#include "gausscov/rng.hpp"
#include "gausscov/graph.hpp"
#include "gausscov/csv.hpp"
#include "gausscov/featurize.hpp"
#include "gausscov/sim.hpp"
