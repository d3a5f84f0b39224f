#pragma once

#include "esle/bath.hpp"
#include "esle/config.hpp"
#include "esle/dynamics.hpp"
#include "esle/ensemble.hpp"
#include "esle/errors.hpp"
#include "esle/fft.hpp"
#include "esle/filters.hpp"
#include "esle/io.hpp"
#include "esle/kernels.hpp"
#include "esle/noise.hpp"
#include "esle/pauli.hpp"
#include "esle/quadrature.hpp"
#include "esle/rng.hpp"
#include "esle/stats.hpp"
#include "esle/version.hpp"
