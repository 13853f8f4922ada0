#pragma once

#include "hgpdc/averaged.hpp"
#include "hgpdc/calibration.hpp"
#include "hgpdc/config.hpp"
#include "hgpdc/coupling.hpp"
#include "hgpdc/dispersion.hpp"
#include "hgpdc/errors.hpp"
#include "hgpdc/grid.hpp"
#include "hgpdc/io.hpp"
#include "hgpdc/observables.hpp"
#include "hgpdc/parallel.hpp"
#include "hgpdc/presets.hpp"
#include "hgpdc/run.hpp"
#include "hgpdc/sampling.hpp"
#include "hgpdc/solver.hpp"
