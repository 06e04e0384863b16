#pragma once

// Umbrella header for the graph-matching toolkit.

#include "graphmatch/bistochastic.hpp"
#include "graphmatch/brute_force.hpp"
#include "graphmatch/bundle.hpp"
#include "graphmatch/core.hpp"
#include "graphmatch/delaunay.hpp"
#include "graphmatch/experiment.hpp"
#include "graphmatch/features.hpp"
#include "graphmatch/graduated_assignment.hpp"
#include "graphmatch/learn.hpp"
#include "graphmatch/linear_assignment.hpp"
#include "graphmatch/loss.hpp"
#include "graphmatch/matrix.hpp"
#include "graphmatch/model_io.hpp"
#include "graphmatch/rng.hpp"
#include "graphmatch/scene.hpp"
#include "graphmatch/shape_context.hpp"
#include "graphmatch/sinkhorn.hpp"
