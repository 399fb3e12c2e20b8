#pragma once

// Umbrella header: the whole library in one include.

#include "sgexp/adapter.hpp"
#include "sgexp/catalog.hpp"
#include "sgexp/completion.hpp"
#include "sgexp/config.hpp"
#include "sgexp/core.hpp"
#include "sgexp/episode.hpp"
#include "sgexp/eval.hpp"
#include "sgexp/geometry.hpp"
#include "sgexp/grid.hpp"
#include "sgexp/infogain.hpp"
#include "sgexp/mapper.hpp"
#include "sgexp/maxrect.hpp"
#include "sgexp/observe.hpp"
#include "sgexp/planner.hpp"
#include "sgexp/raster.hpp"
#include "sgexp/scene_graph.hpp"
#include "sgexp/scene_io.hpp"
#include "sgexp/tracks.hpp"
#include "sgexp/voxel.hpp"
#include "sgexp/walls.hpp"
#include "sgexp/world.hpp"
