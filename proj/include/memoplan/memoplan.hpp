#pragma once

// Umbrella header for the memoization-planning toolkit.

#include "memoplan/allocator.hpp"
#include "memoplan/config.hpp"
#include "memoplan/distributions.hpp"
#include "memoplan/errors.hpp"
#include "memoplan/expressions.hpp"
#include "memoplan/planner.hpp"
#include "memoplan/top_vectors.hpp"
