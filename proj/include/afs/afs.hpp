#pragma once

#include "afs/params.hpp"
#include "afs/impact.hpp"
#include "afs/alpha.hpp"
#include "afs/policy.hpp"
#include "afs/pnl.hpp"
#include "afs/calibration.hpp"
#include "afs/sensitivity.hpp"
#include "afs/io.hpp"
