// Umbrella header for the polymerlab toolkit.

#pragma once

#include "polymerlab/config.hpp"
#include "polymerlab/disorder.hpp"
#include "polymerlab/environment.hpp"
#include "polymerlab/errors.hpp"
#include "polymerlab/estimators.hpp"
#include "polymerlab/io.hpp"
#include "polymerlab/lattice.hpp"
#include "polymerlab/logsumexp.hpp"
#include "polymerlab/nearly_gamma.hpp"
#include "polymerlab/parallel.hpp"
#include "polymerlab/polymer.hpp"
#include "polymerlab/rng.hpp"
#include "polymerlab/skeleton.hpp"
#include "polymerlab/special.hpp"
#include "polymerlab/stats.hpp"
