#pragma once

#include <functional>

namespace lossgeom {

// Numerical differentiation of scalar functions on an interval.
//
// Central stencils of accuracy O(h^2) are refined with two levels of
// Richardson extrapolation; one-sided stencils (for points at or near a
// domain boundary) with one level.  Orders 1..6 are supported; accuracy
// degrades roughly one decimal digit per order.

using ScalarFn = std::function<double(double)>;

// k-th derivative at x using the central stencil with base step h.
// The stencil reaches x +- radius(k)*h; the caller must keep it in-domain.
double central_derivative(const ScalarFn& f, double x, int order, double h);

// k-th derivative at x0 using a one-sided stencil marching into the domain.
// direction = +1 evaluates at x0, x0+h, ... ; -1 marches left.
double onesided_derivative(const ScalarFn& f, double x0, int order, double h,
                           int direction);

// Stencil half-width of the central scheme (before step halving).
int central_radius(int order);

// Number of points of the one-sided scheme.
int onesided_points(int order);

// Derivative of a loss branch defined on [lo, hi]: picks step size from the
// distance to the nearest endpoint (h = max(1e-5, 1e-2 * distance), scaled
// up for orders >= 3) and falls back to a one-sided stencil when the central
// one would leave the domain.  Returns NaN if the function is not finite on
// the stencil.
double interval_derivative(const ScalarFn& f, double x, int order, double lo,
                           double hi);

}  // namespace lossgeom
