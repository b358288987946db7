#pragma once

#include <functional>
#include <string>
#include <vector>

#include "freqseg/params.hpp"

namespace freqseg {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  int coords = 0;
  bool pass = true;
  bool skipped_frozen = false;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool all_pass = true;
  bool nonfinite = false; // a probe produced non-finite loss; reported, not thrown
  double eps = 0.0, tol = 0.0;
  std::string summary() const;
};

// Central-difference check of analytic gradients. `loss` must be a
// deterministic pure forward pass; `loss_and_grad` additionally accumulates
// gradients into `ps` (grads are zeroed here first). Frozen entries are
// skipped — their analytic gradient is asserted to stay exactly zero. Large
// tensors are subsampled, at least `min_coords` coordinates each.
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::function<double()>& loss_and_grad, ParamStore& ps,
                           double eps = 1e-5, double tol = 1e-4, int min_coords = 32,
                           std::uint64_t seed = 0x5eedULL);

} // namespace freqseg
