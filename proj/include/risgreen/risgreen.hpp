#pragma once

#include "risgreen/beamform.hpp"
#include "risgreen/channel.hpp"
#include "risgreen/conic.hpp"
#include "risgreen/harness.hpp"
#include "risgreen/model.hpp"
#include "risgreen/orchestrate.hpp"
#include "risgreen/ris_select.hpp"
