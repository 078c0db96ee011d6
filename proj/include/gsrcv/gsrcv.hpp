#pragma once

#include "builders.hpp"
#include "crossval.hpp"
#include "error.hpp"
#include "format.hpp"
#include "graph.hpp"
#include "ingest.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "reconstruct.hpp"
#include "sampling.hpp"
#include "signals.hpp"
