#pragma once

#include "vallee/error.hpp"
#include "vallee/trig_series.hpp"
#include "vallee/quadrature.hpp"
#include "vallee/fourier.hpp"
#include "vallee/psi.hpp"
#include "vallee/special.hpp"
#include "vallee/kernels.hpp"
#include "vallee/lp.hpp"
#include "vallee/best_approx.hpp"
#include "vallee/harness.hpp"
