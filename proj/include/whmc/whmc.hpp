#pragma once

#include "whmc/baselines.hpp"
#include "whmc/coupling.hpp"
#include "whmc/engine.hpp"
#include "whmc/errors.hpp"
#include "whmc/estimators.hpp"
#include "whmc/levy_model.hpp"
#include "whmc/random.hpp"
#include "whmc/roots.hpp"
#include "whmc/special_functions.hpp"
#include "whmc/wh_sampler.hpp"
