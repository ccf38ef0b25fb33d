#pragma once

#include "simcheck/bootstrap.hpp"
#include "simcheck/dataset.hpp"
#include "simcheck/errors.hpp"
#include "simcheck/experiments.hpp"
#include "simcheck/index_estimation.hpp"
#include "simcheck/index_geometry.hpp"
#include "simcheck/io.hpp"
#include "simcheck/kernel.hpp"
#include "simcheck/nelder_mead.hpp"
#include "simcheck/numeric.hpp"
#include "simcheck/parallel.hpp"
#include "simcheck/pipeline.hpp"
#include "simcheck/rng.hpp"
#include "simcheck/smoothers.hpp"
#include "simcheck/test_statistics.hpp"
