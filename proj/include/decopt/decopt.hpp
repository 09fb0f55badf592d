#pragma once

#include "decopt/baselines.hpp"
#include "decopt/hard_instance.hpp"
#include "decopt/harness.hpp"
#include "decopt/network.hpp"
#include "decopt/problem.hpp"
#include "decopt/run_record.hpp"
#include "decopt/schedule.hpp"
#include "decopt/solver.hpp"
#include "decopt/span_oracle.hpp"
