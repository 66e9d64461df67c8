#pragma once

// Convenience umbrella for the whole library.

#include "edgeplan/core.hpp"
#include "edgeplan/denoising.hpp"
#include "edgeplan/io.hpp"
#include "edgeplan/losses.hpp"
#include "edgeplan/matching.hpp"
#include "edgeplan/metrics.hpp"
#include "edgeplan/polygonize.hpp"
#include "edgeplan/projection.hpp"
#include "edgeplan/svg.hpp"
