#include "freqseg/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "freqseg/kernels.hpp"

namespace freqseg {

double Adam::lr_for_epoch(int epoch) const {
  return cfg_.lr0 * std::pow(cfg_.decay, epoch);
}

void Adam::step(ParamStore& ps, int epoch) {
  if (!ps.grads_populated())
    throw std::logic_error("Adam::step called without a preceding backward pass");
  ++t_;
  const double lr = lr_for_epoch(epoch);
  const double c1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(t_)));
  const double c2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(t_)));
  const auto& K = kern::active();

  for (auto& [name, p] : ps) {
    if (!p.trainable) continue;
    Slot& slot = slots_[name];
    if (slot.m.data.empty()) {
      slot.m = Tensor(p.value.b, p.value.c, p.value.h, p.value.w);
      slot.v = Tensor(p.value.b, p.value.c, p.value.h, p.value.w);
    }
    K.adam_step(p.value.data.data(), p.grad.data.data(), slot.m.data.data(), slot.v.data.data(),
                p.value.size(), lr, cfg_.beta1, cfg_.beta2, cfg_.eps, c1, c2);
  }
}

} // namespace freqseg
