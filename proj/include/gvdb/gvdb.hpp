#pragma once

#include "gvdb/abstraction.hpp"
#include "gvdb/error.hpp"
#include "gvdb/geometry.hpp"
#include "gvdb/graph.hpp"
#include "gvdb/ingest.hpp"
#include "gvdb/layout.hpp"
#include "gvdb/partitioner.hpp"
#include "gvdb/pipeline.hpp"
#include "gvdb/placer.hpp"
#include "gvdb/query.hpp"
#include "gvdb/rtree.hpp"
#include "gvdb/store.hpp"
#include "gvdb/synthetic.hpp"
