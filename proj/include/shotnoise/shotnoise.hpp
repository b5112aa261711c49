#pragma once

#include "shotnoise/constants.hpp"
#include "shotnoise/criterion.hpp"
#include "shotnoise/io.hpp"
#include "shotnoise/kernel.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/parallel.hpp"
#include "shotnoise/path.hpp"
#include "shotnoise/random.hpp"
#include "shotnoise/reference.hpp"
#include "shotnoise/series.hpp"
#include "shotnoise/stats.hpp"
