#pragma once

#include "fracdiff/specfun.hpp"
#include "fracdiff/problem.hpp"
#include "fracdiff/l1_scheme.hpp"
#include "fracdiff/stepdoubling.hpp"
#include "fracdiff/bench.hpp"
#include "fracdiff/io.hpp"
