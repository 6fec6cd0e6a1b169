#pragma once

#include "kpz/acceptance.hpp"
#include "kpz/asep.hpp"
#include "kpz/error.hpp"
#include "kpz/harness.hpp"
#include "kpz/hsvm.hpp"
#include "kpz/limits.hpp"
#include "kpz/qmoment.hpp"
#include "kpz/quadrature.hpp"
#include "kpz/rng.hpp"
#include "kpz/scaling.hpp"
#include "kpz/sixvertex.hpp"
#include "kpz/stats.hpp"
#include "kpz/version.hpp"
