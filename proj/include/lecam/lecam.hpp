#pragma once

#include "lecam/config.hpp"
#include "lecam/csv.hpp"
#include "lecam/distances.hpp"
#include "lecam/errors.hpp"
#include "lecam/experiments.hpp"
#include "lecam/function.hpp"
#include "lecam/kernels.hpp"
#include "lecam/laws.hpp"
#include "lecam/model.hpp"
#include "lecam/normal.hpp"
#include "lecam/oracle.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/rng.hpp"
#include "lecam/simulate.hpp"
