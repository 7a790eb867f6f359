#pragma once

#include "minihes/bench.hpp"
#include "minihes/cg.hpp"
#include "minihes/curvature.hpp"
#include "minihes/data.hpp"
#include "minihes/model.hpp"
#include "minihes/oracle.hpp"
#include "minihes/parallel.hpp"
#include "minihes/report.hpp"
#include "minihes/rng.hpp"
#include "minihes/synthetic.hpp"
#include "minihes/trainer.hpp"
#include "minihes/verify_suite.hpp"
