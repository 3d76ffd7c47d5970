#pragma once

#include "itmlab/circle_maps.hpp"
#include "itmlab/error.hpp"
#include "itmlab/interval_set.hpp"
#include "itmlab/io_json.hpp"
#include "itmlab/itm.hpp"
#include "itmlab/measure.hpp"
#include "itmlab/parallel.hpp"
#include "itmlab/random.hpp"
#include "itmlab/scalar.hpp"
#include "itmlab/sweep.hpp"
#include "itmlab/symbolic.hpp"
#include "itmlab/trader.hpp"
