#pragma once

#include "spenet/estimators.hpp"
#include "spenet/io.hpp"
#include "spenet/matrix.hpp"
#include "spenet/models.hpp"
#include "spenet/montecarlo.hpp"
#include "spenet/parallel.hpp"
#include "spenet/rng.hpp"
#include "spenet/simharness.hpp"
#include "spenet/special.hpp"
#include "spenet/teststat.hpp"
