#pragma once

#include "gbsk/bench.hpp"
#include "gbsk/dataset.hpp"
#include "gbsk/error.hpp"
#include "gbsk/granular_ball.hpp"
#include "gbsk/matrix.hpp"
#include "gbsk/metrics.hpp"
#include "gbsk/parallel.hpp"
#include "gbsk/peaks.hpp"
#include "gbsk/pipeline.hpp"
#include "gbsk/random.hpp"
#include "gbsk/skeleton.hpp"
