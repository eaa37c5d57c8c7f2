#pragma once

#include "donet/kspace.hpp"

namespace donet {

// Sampling mask families, all in centred k-space layout and deterministic per seed.
//
//   uniform1d    columns j with j % R == 0, plus the centre band
//   cartesian1d  centre band plus columns drawn without replacement with
//                probability ~ exp(-d^2 / (2 sigma^2)), sigma = w/6, d = j - w/2,
//                until round(w / R) columns are sampled
//   random2d     Bernoulli points with p = min(1, s * gaussian(d)), s chosen so
//                the expected count is h*w/R
//   radial2d     ceil(h*w / (R*max(h, w))) equiangular spokes through the DC pixel
//
// The centre band spans round(center_fraction * w) columns around w/2 (1-D
// patterns only). Requires R >= 2, center_fraction in [0, 0.2]; R larger than
// the number of columns (1-D) or pixels (2-D) is infeasible.
SamplingMask make_mask(MaskPattern pattern, int acceleration, std::size_t h, std::size_t w, double center_fraction,
                       std::uint64_t seed);

}  // namespace donet
