#pragma once

#include "isohull/errors.hpp"
#include "isohull/rng.hpp"
#include "isohull/special.hpp"
#include "isohull/linalg.hpp"
#include "isohull/sphere_stats.hpp"
#include "isohull/hull.hpp"
#include "isohull/moments.hpp"
#include "isohull/isotropy.hpp"
#include "isohull/harness/config.hpp"
#include "isohull/harness/trial.hpp"
#include "isohull/harness/records_io.hpp"
#include "isohull/harness/experiment.hpp"
#include "isohull/harness/calibration.hpp"
