#pragma once

#include "folr/basis.hpp"
#include "folr/error.hpp"
#include "folr/eval.hpp"
#include "folr/fit.hpp"
#include "folr/ordinal.hpp"
#include "folr/persist.hpp"
