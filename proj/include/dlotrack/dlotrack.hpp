#pragma once

#include "dlotrack/dataset.hpp"
#include "dlotrack/gmm.hpp"
#include "dlotrack/io.hpp"
#include "dlotrack/metrics.hpp"
#include "dlotrack/parallel.hpp"
#include "dlotrack/pipeline.hpp"
#include "dlotrack/resample.hpp"
#include "dlotrack/sim.hpp"
#include "dlotrack/svg.hpp"
#include "dlotrack/tracker.hpp"
#include "dlotrack/types.hpp"
#include "dlotrack/upe.hpp"
#include "dlotrack/visibility.hpp"
