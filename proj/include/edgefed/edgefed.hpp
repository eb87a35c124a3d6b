#pragma once

#include <edgefed/cli.hpp>
#include <edgefed/compare.hpp>
#include <edgefed/cost.hpp>
#include <edgefed/demand.hpp>
#include <edgefed/errors.hpp>
#include <edgefed/latency.hpp>
#include <edgefed/lp/assembly.hpp>
#include <edgefed/lp/linear_program.hpp>
#include <edgefed/lp/mps.hpp>
#include <edgefed/lp/simplex.hpp>
#include <edgefed/model.hpp>
#include <edgefed/reporting.hpp>
#include <edgefed/scenario_io.hpp>
#include <edgefed/scheduler.hpp>
#include <edgefed/synth.hpp>
