#pragma once

// Umbrella header for the forward-market simulator.

#include "oatf/contracts.hpp"
#include "oatf/engine.hpp"
#include "oatf/market_config.hpp"
#include "oatf/negotiation.hpp"
#include "oatf/numeric.hpp"
#include "oatf/physics.hpp"
#include "oatf/reporting.hpp"
#include "oatf/risk.hpp"
#include "oatf/rng.hpp"
#include "oatf/sampling.hpp"
#include "oatf/spot.hpp"
#include "oatf/utility_model.hpp"
