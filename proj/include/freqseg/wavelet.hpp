#pragma once

#include "freqseg/tensor.hpp"

namespace freqseg {

// Orthonormal single-level 2D Haar split, per channel. Bands are half
// resolution; ll carries block sums /2, lh/hl/hh the horizontal, vertical
// and diagonal details. Orthonormal scaling gives the exact energy identity
// sum(x^2) = sum(ll^2)+sum(lh^2)+sum(hl^2)+sum(hh^2).
struct WaveletBands {
  Tensor ll, lh, hl, hh;
};

WaveletBands haar_decompose(const Tensor& x); // H, W must be even
Tensor haar_reconstruct(const WaveletBands& bands);

// The per-block transform matrix is symmetric orthogonal, so the adjoint of
// decompose equals reconstruct applied to the band gradients.
Tensor haar_decompose_backward(const WaveletBands& gbands);

} // namespace freqseg
