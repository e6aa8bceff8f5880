#pragma once

#include "thermoscale/channels.hpp"
#include "thermoscale/error.hpp"
#include "thermoscale/fidelity.hpp"
#include "thermoscale/fitkit.hpp"
#include "thermoscale/linalg.hpp"
#include "thermoscale/resetsim.hpp"
#include "thermoscale/rng.hpp"
#include "thermoscale/states.hpp"
