#pragma once

#include "specpath/baseline.hpp"
#include "specpath/data_io.hpp"
#include "specpath/errors.hpp"
#include "specpath/features.hpp"
#include "specpath/greedy.hpp"
#include "specpath/interpret.hpp"
#include "specpath/model.hpp"
#include "specpath/paths.hpp"
#include "specpath/scaling.hpp"
#include "specpath/solver.hpp"
