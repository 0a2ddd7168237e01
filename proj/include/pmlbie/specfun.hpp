#pragma once

#include <utility>

#include "pmlbie/types.hpp"

namespace pmlbie::specfun {

// Square root with Re w >= 0 and arg w in (-pi/2, pi/2]. The negative real
// axis maps onto the positive imaginary axis.
cd branch_sqrt(cd z);

// Hankel function of the first kind, orders 0 and 1. Accurate to ~1e-13
// relative in the closed upper half plane; throws DomainError at z = 0.
cd hankel1(int order, cd z);

// Both orders at once (shares the expensive part of the evaluation).
std::pair<cd, cd> hankel1_01(cd z);

// exp(-i z) * H_order^{(1)}(z); finite where hankel1 underflows (Im z >> 1).
cd hankel1_scaled(int order, cd z);

namespace detail {

// Radius below which the ascending series is used.
inline constexpr double kSeriesRadius = 2.0;

// Ascending series for J_0, J_1, Y_0, Y_1 combined into H_0, H_1.
std::pair<cd, cd> hankel01_series(cd z);

// exp(-i z) H_{0,1}(z) from the Laguerre-type integral representation, using
// an n-point generalized Gauss-Laguerre rule.
std::pair<cd, cd> hankel01_integral_scaled(cd z, int nodes);

}  // namespace detail

}  // namespace pmlbie::specfun
