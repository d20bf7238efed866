#ifndef SKEWEIG_SKEWEIG_HPP
#define SKEWEIG_SKEWEIG_HPP

#include "bidiag.hpp"
#include "dense.hpp"
#include "errors.hpp"
#include "lanczos.hpp"
#include "matrix_market.hpp"
#include "reorth.hpp"
#include "restart.hpp"
#include "skew_matrix.hpp"
#include "solver.hpp"

#endif  // SKEWEIG_SKEWEIG_HPP
