#pragma once

// Umbrella header: guaranteed-correct reachability bounds for MDPs through
// interval iteration with directed floating-point rounding.

#include "probound/bench.hpp"
#include "probound/graph.hpp"
#include "probound/iteration.hpp"
#include "probound/mdp.hpp"
#include "probound/model_io.hpp"
#include "probound/oracle.hpp"
#include "probound/pctl.hpp"
#include "probound/rational.hpp"
#include "probound/rounding.hpp"
