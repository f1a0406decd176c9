#pragma once

// Umbrella header: pulls in the full library.

#include "usir/beamformer.hpp"
#include "usir/cli.hpp"
#include "usir/config.hpp"
#include "usir/container.hpp"
#include "usir/ddrm.hpp"
#include "usir/denoisers.hpp"
#include "usir/errors.hpp"
#include "usir/experiment.hpp"
#include "usir/grid.hpp"
#include "usir/metrics.hpp"
#include "usir/operators.hpp"
#include "usir/phantom.hpp"
#include "usir/png.hpp"
#include "usir/pulse.hpp"
#include "usir/random.hpp"
#include "usir/simulate.hpp"
#include "usir/svd.hpp"
#include "usir/system_matrix.hpp"
#include "usir/variance.hpp"
