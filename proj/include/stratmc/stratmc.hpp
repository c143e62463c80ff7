#pragma once

#include "stratmc/allocation.hpp"
#include "stratmc/alpha_control.hpp"
#include "stratmc/distributions.hpp"
#include "stratmc/driver.hpp"
#include "stratmc/experiment.hpp"
#include "stratmc/geometry.hpp"
#include "stratmc/problems.hpp"
#include "stratmc/random.hpp"
#include "stratmc/splitting.hpp"
#include "stratmc/statistics.hpp"
#include "stratmc/variance.hpp"
