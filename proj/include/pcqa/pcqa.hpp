#pragma once

#include "pcqa/bench.hpp"
#include "pcqa/config.hpp"
#include "pcqa/csv.hpp"
#include "pcqa/distort.hpp"
#include "pcqa/error.hpp"
#include "pcqa/geometry.hpp"
#include "pcqa/image.hpp"
#include "pcqa/iqa2d.hpp"
#include "pcqa/metrics.hpp"
#include "pcqa/neighbor_index.hpp"
#include "pcqa/normals.hpp"
#include "pcqa/parallel.hpp"
#include "pcqa/ply.hpp"
#include "pcqa/png.hpp"
#include "pcqa/point_cloud.hpp"
#include "pcqa/projection.hpp"
#include "pcqa/stats.hpp"
#include "pcqa/subjective.hpp"
#include "pcqa/view.hpp"
