#ifndef TFGKP_TFGKP_HPP
#define TFGKP_TFGKP_HPP

#include "analytic.hpp"
#include "biphoton.hpp"
#include "comb.hpp"
#include "error_correction.hpp"
#include "errors.hpp"
#include "fidelity.hpp"
#include "grid.hpp"
#include "phase_space.hpp"
#include "propagation.hpp"

#endif
