#pragma once

#include "rmtlab/distributions.hpp"
#include "rmtlab/eigensolve.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/experiments.hpp"
#include "rmtlab/fitting.hpp"
#include "rmtlab/histogram.hpp"
#include "rmtlab/io.hpp"
#include "rmtlab/minimize.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/quadrature.hpp"
#include "rmtlab/random.hpp"
#include "rmtlab/special_functions.hpp"
