#pragma once

#include "greenspread/cli.hpp"
#include "greenspread/engine.hpp"
#include "greenspread/errors.hpp"
#include "greenspread/io.hpp"
#include "greenspread/metrics.hpp"
#include "greenspread/netgen.hpp"
#include "greenspread/network.hpp"
#include "greenspread/rng.hpp"
#include "greenspread/sweep.hpp"
