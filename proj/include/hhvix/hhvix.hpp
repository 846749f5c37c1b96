#pragma once

#include "hhvix/charfn.hpp"
#include "hhvix/erfc.hpp"
#include "hhvix/error.hpp"
#include "hhvix/jumps.hpp"
#include "hhvix/mc.hpp"
#include "hhvix/params.hpp"
#include "hhvix/pricer.hpp"
#include "hhvix/riccati.hpp"
#include "hhvix/vix.hpp"
