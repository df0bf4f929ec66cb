#pragma once

#include "radionet/bc.hpp"
#include "radionet/coded_broadcast.hpp"
#include "radionet/cr_broadcast.hpp"
#include "radionet/errors.hpp"
#include "radionet/gathering.hpp"
#include "radionet/generators.hpp"
#include "radionet/gf2.hpp"
#include "radionet/graph.hpp"
#include "radionet/harness.hpp"
#include "radionet/layering.hpp"
#include "radionet/layering_build.hpp"
#include "radionet/pipelines.hpp"
#include "radionet/rng.hpp"
#include "radionet/sim.hpp"
#include "radionet/trace_io.hpp"
