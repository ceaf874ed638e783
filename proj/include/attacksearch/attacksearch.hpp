#pragma once

#include "attacksearch/bench.hpp"
#include "attacksearch/config_space.hpp"
#include "attacksearch/errors.hpp"
#include "attacksearch/evaluation.hpp"
#include "attacksearch/linear_victim.hpp"
#include "attacksearch/memory.hpp"
#include "attacksearch/parallel.hpp"
#include "attacksearch/proposal.hpp"
#include "attacksearch/response_surface.hpp"
#include "attacksearch/rng.hpp"
#include "attacksearch/run_config.hpp"
#include "attacksearch/search.hpp"
#include "attacksearch/theory.hpp"
#include "attacksearch/theory_checks.hpp"
#include "attacksearch/victim.hpp"
