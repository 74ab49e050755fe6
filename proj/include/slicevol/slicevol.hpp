#pragma once

// Umbrella header: distributional volume prediction for stacked-slice
// area series, from preprocessing through fitting, simulation and
// evaluation.

#include "slicevol/dataset_io.hpp"
#include "slicevol/error.hpp"
#include "slicevol/estimation.hpp"
#include "slicevol/gamma.hpp"
#include "slicevol/interpolant.hpp"
#include "slicevol/jump.hpp"
#include "slicevol/moments.hpp"
#include "slicevol/nelder_mead.hpp"
#include "slicevol/parallel.hpp"
#include "slicevol/pipeline.hpp"
#include "slicevol/report_io.hpp"
#include "slicevol/rng.hpp"
#include "slicevol/sde.hpp"
#include "slicevol/slice_data.hpp"
#include "slicevol/synth.hpp"
#include "slicevol/version.hpp"
