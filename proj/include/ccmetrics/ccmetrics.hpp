#pragma once

#include "ccmetrics/cc_protocol.hpp"
#include "ccmetrics/components.hpp"
#include "ccmetrics/edt.hpp"
#include "ccmetrics/error.hpp"
#include "ccmetrics/io.hpp"
#include "ccmetrics/metrics.hpp"
#include "ccmetrics/simulate.hpp"
#include "ccmetrics/unified.hpp"
#include "ccmetrics/volume.hpp"
#include "ccmetrics/voronoi.hpp"
