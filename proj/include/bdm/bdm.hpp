#pragma once

// Everything except the command layer (bdm/cli.hpp).

#include "bdm/areal_graph.hpp"
#include "bdm/contiguity.hpp"
#include "bdm/diagnostics.hpp"
#include "bdm/error.hpp"
#include "bdm/io/archive.hpp"
#include "bdm/io/choropleth.hpp"
#include "bdm/io/config.hpp"
#include "bdm/io/csv.hpp"
#include "bdm/io/dataset_io.hpp"
#include "bdm/io/format.hpp"
#include "bdm/io/graph_io.hpp"
#include "bdm/io/table.hpp"
#include "bdm/mcmc.hpp"
#include "bdm/model.hpp"
#include "bdm/rng.hpp"
#include "bdm/sampler.hpp"
#include "bdm/simulate.hpp"
