#pragma once

#include "traffic/algebra.hpp"
#include "traffic/canonical.hpp"
#include "traffic/contraction.hpp"
#include "traffic/dsl.hpp"
#include "traffic/entry_law.hpp"
#include "traffic/errors.hpp"
#include "traffic/experiment.hpp"
#include "traffic/graph.hpp"
#include "traffic/law_registry.hpp"
#include "traffic/laws.hpp"
#include "traffic/local_product.hpp"
#include "traffic/matrix.hpp"
#include "traffic/matrix_eval.hpp"
#include "traffic/monte_carlo.hpp"
#include "traffic/nc_oracle.hpp"
#include "traffic/partition.hpp"
#include "traffic/random.hpp"
#include "traffic/sampler.hpp"
#include "traffic/structure.hpp"
#include "traffic/value.hpp"
