#pragma once

#include "ballsbins/core_model.hpp"
#include "ballsbins/errors.hpp"
#include "ballsbins/event_enumerator.hpp"
#include "ballsbins/exact_solver.hpp"
#include "ballsbins/optimizer.hpp"
#include "ballsbins/rational.hpp"
#include "ballsbins/simulator.hpp"
#include "ballsbins/suites.hpp"
