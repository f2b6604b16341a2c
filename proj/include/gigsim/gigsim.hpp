#pragma once

#include "gigsim/errors.hpp"
#include "gigsim/gh.hpp"
#include "gigsim/gig.hpp"
#include "gigsim/hankel_bounds.hpp"
#include "gigsim/jaeger.hpp"
#include "gigsim/parallel.hpp"
#include "gigsim/random.hpp"
#include "gigsim/series.hpp"
#include "gigsim/special_functions.hpp"
#include "gigsim/verify.hpp"
