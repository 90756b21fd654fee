#ifndef LAMPERTI_LAMPERTI_HPP
#define LAMPERTI_LAMPERTI_HPP

#include "lamperti/analytics.hpp"
#include "lamperti/branching.hpp"
#include "lamperti/combinatorics.hpp"
#include "lamperti/environment.hpp"
#include "lamperti/oracle.hpp"
#include "lamperti/rng.hpp"
#include "lamperti/samplers.hpp"
#include "lamperti/set_kind.hpp"
#include "lamperti/stats.hpp"
#include "lamperti/version.hpp"
#include "lamperti/walker.hpp"

#endif  // LAMPERTI_LAMPERTI_HPP
