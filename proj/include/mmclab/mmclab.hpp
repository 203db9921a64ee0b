#pragma once

// Umbrella header.

#include "mmclab/classify.hpp"
#include "mmclab/config.hpp"
#include "mmclab/drift.hpp"
#include "mmclab/errors.hpp"
#include "mmclab/euclidean.hpp"
#include "mmclab/experiment.hpp"
#include "mmclab/gaussian.hpp"
#include "mmclab/io.hpp"
#include "mmclab/linalg.hpp"
#include "mmclab/model_spaces.hpp"
#include "mmclab/parallel.hpp"
#include "mmclab/quadrature.hpp"
#include "mmclab/rng.hpp"
#include "mmclab/sde.hpp"
