#pragma once

// Umbrella header.

#include "losstest/core.hpp"
#include "losstest/csv.hpp"
#include "losstest/error.hpp"
#include "losstest/hypothesis.hpp"
#include "losstest/kdtree.hpp"
#include "losstest/knn.hpp"
#include "losstest/madlemma.hpp"
#include "losstest/parallel.hpp"
#include "losstest/report.hpp"
#include "losstest/rng.hpp"
#include "losstest/simulate.hpp"
