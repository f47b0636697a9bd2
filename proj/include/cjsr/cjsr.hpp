#pragma once

#include "cjsr/baseline.hpp"
#include "cjsr/bench.hpp"
#include "cjsr/certify.hpp"
#include "cjsr/ellipsoid.hpp"
#include "cjsr/error.hpp"
#include "cjsr/graph.hpp"
#include "cjsr/random.hpp"
#include "cjsr/scenario.hpp"
#include "cjsr/specfun.hpp"
#include "cjsr/symlin.hpp"
#include "cjsr/system.hpp"
