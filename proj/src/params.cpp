#include "freqseg/params.hpp"

#include <stdexcept>

#include "freqseg/kernels.hpp"

namespace freqseg {

Param& ParamStore::add(const std::string& name, Tensor init, bool trainable) {
  if (has(name)) throw std::invalid_argument("ParamStore: duplicate entry " + name);
  Param p;
  p.grad = Tensor(init.b, init.c, init.h, init.w, 0.0);
  p.value = std::move(init);
  p.trainable = trainable;
  return entries_.emplace(name, std::move(p)).first->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: no entry " + name);
  return it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::invalid_argument("ParamStore: no entry " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : entries_) p.grad.data.assign(p.grad.data.size(), 0.0);
  grads_populated_ = false;
}

void ParamStore::accumulate_grad(const std::string& name, const Tensor& g) {
  Param& p = at(name);
  grads_populated_ = true;
  if (!p.trainable) return;
  if (!p.grad.same_shape(g))
    throw std::invalid_argument("grad shape mismatch for " + name + ": " + p.grad.shape_str() +
                                " vs " + g.shape_str());
  kern::active().add(p.grad.data.data(), g.data.data(), p.grad.data.data(), g.size());
}

std::size_t ParamStore::trainable_scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : entries_)
    if (p.trainable) n += p.value.size();
  return n;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, p] : entries_) out.push_back(name);
  return out;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, p] : entries_)
    if (name.rfind(prefix, 0) == 0) out.push_back(name);
  return out;
}

} // namespace freqseg
