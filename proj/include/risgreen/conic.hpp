#pragma once

#include "risgreen/conic/cones.hpp"
#include "risgreen/conic/dump.hpp"
#include "risgreen/conic/hermitian.hpp"
#include "risgreen/conic/problem.hpp"
#include "risgreen/conic/solver.hpp"
