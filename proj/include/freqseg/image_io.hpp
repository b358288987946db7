#pragma once

#include <string>

#include "freqseg/tensor.hpp"

namespace freqseg {

// 8-bit binary PGM (P5). Images are (1,1,H,W) tensors in [0,1]; masks use
// {0,255} on disk and {0,1} in memory.
void write_pgm(const Tensor& img, const std::string& path);   // clamps to [0,1]
Tensor read_pgm(const std::string& path);                     // -> [0,1]
void write_mask_pgm(const Tensor& mask, const std::string& path);
Tensor read_mask_pgm(const std::string& path);                // >=128 -> 1
// min-max normalized dump for inspecting feature maps / bands (one channel)
void write_pgm_normalized(const Tensor& plane, const std::string& path);

} // namespace freqseg
