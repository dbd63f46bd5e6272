#pragma once

#include "gridopt/bench.hpp"
#include "gridopt/calibrate.hpp"
#include "gridopt/error_shape.hpp"
#include "gridopt/errors.hpp"
#include "gridopt/fft.hpp"
#include "gridopt/kernel_table.hpp"
#include "gridopt/lookup.hpp"
#include "gridopt/nelder_mead.hpp"
#include "gridopt/nufft.hpp"
#include "gridopt/parallel.hpp"
#include "gridopt/rng.hpp"
#include "gridopt/slepian.hpp"
#include "gridopt/spectral.hpp"
