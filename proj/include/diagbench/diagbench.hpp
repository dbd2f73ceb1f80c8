#pragma once

// Umbrella header.

#include "diagbench/content_metrics.hpp"
#include "diagbench/document.hpp"
#include "diagbench/judge.hpp"
#include "diagbench/layout_metrics.hpp"
#include "diagbench/manifest.hpp"
#include "diagbench/perceptual.hpp"
#include "diagbench/pipeline.hpp"
#include "diagbench/raster.hpp"
#include "diagbench/registry.hpp"
#include "diagbench/sampler.hpp"
#include "diagbench/scoring.hpp"
#include "diagbench/svg.hpp"
#include "diagbench/text.hpp"
#include "diagbench/version.hpp"
