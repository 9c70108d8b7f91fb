#pragma once

#include "xorlab/colorcode.hpp"
#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/exactstats.hpp"
#include "xorlab/experiment.hpp"
#include "xorlab/instance.hpp"
#include "xorlab/lowdegree.hpp"
#include "xorlab/patterns.hpp"
#include "xorlab/pipeline.hpp"
#include "xorlab/rng.hpp"
