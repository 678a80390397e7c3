#pragma once

#include "gelma/errors.hpp"
#include "gelma/numeric_core.hpp"
#include "gelma/prox_ops.hpp"
#include "gelma/solvers.hpp"
#include "gelma/ode_flow.hpp"
#include "gelma/oracle.hpp"
#include "gelma/imaging.hpp"
#include "gelma/generate.hpp"
