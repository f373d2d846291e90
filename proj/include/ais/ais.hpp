#pragma once

#include "ais/clonal.hpp"
#include "ais/config.hpp"
#include "ais/csv.hpp"
#include "ais/dca.hpp"
#include "ais/detector_index.hpp"
#include "ais/error.hpp"
#include "ais/lifecycle.hpp"
#include "ais/metrics.hpp"
#include "ais/negsel.hpp"
#include "ais/representation.hpp"
#include "ais/serialization.hpp"
#include "ais/synth.hpp"
