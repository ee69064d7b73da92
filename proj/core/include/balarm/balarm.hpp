#pragma once

#include "balarm/alarm.hpp"
#include "balarm/bootstrap.hpp"
#include "balarm/diagnostics.hpp"
#include "balarm/em.hpp"
#include "balarm/error.hpp"
#include "balarm/glm.hpp"
#include "balarm/ingest.hpp"
#include "balarm/io.hpp"
#include "balarm/model.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"
#include "balarm/selection.hpp"
