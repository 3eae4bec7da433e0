#pragma once

#include "relembed/compression.hpp"
#include "relembed/constructions.hpp"
#include "relembed/embeddings.hpp"
#include "relembed/error.hpp"
#include "relembed/graph.hpp"
#include "relembed/io.hpp"
#include "relembed/linalg.hpp"
#include "relembed/optimize.hpp"
#include "relembed/report.hpp"
#include "relembed/rng.hpp"
