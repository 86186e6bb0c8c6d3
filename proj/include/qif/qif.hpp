#pragma once

#include "qif/analytic.hpp"
#include "qif/core.hpp"
#include "qif/errors.hpp"
#include "qif/lindblad.hpp"
#include "qif/model.hpp"
#include "qif/sweep.hpp"
