#pragma once

#include <vector>

#include "lossgeom/loss.hpp"

namespace lossgeom {

// A sampled point of a prediction set: x = loss on outcome 0, y = loss on
// outcome 1.  x must increase and y decrease along the curve; +infinity is
// allowed at the first y (all-mass-on-0 end) and the last x.
struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

// Recovers the canonical (proper) index of a sampled prediction curve: each
// point is assigned p = 1/(1-s) from its tangent slope s < 0, and the two
// branch evaluators interpolate the curve over that index.
//
// The fit runs on the exp-transformed curve (e^-x, e^-y), where infinite
// losses become finite and log-like curves flatten out; slopes come from a
// not-a-knot parametric spline and the final evaluators are monotone cubic
// interpolants over a dense resampling.
//
// The returned loss is defined on the index range spanned by the samples and
// clamps outside it, exactly like a truncated loss.  Throws on fewer than 3
// points, non-monotone input, or a nonnegative tangent slope.
LossFunction reparameterize(const std::vector<CurvePoint>& curve);

}  // namespace lossgeom
