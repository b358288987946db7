#pragma once

#include <map>
#include <string>
#include <vector>

#include "freqseg/tensor.hpp"

namespace freqseg {

struct Param {
  Tensor value;
  Tensor grad;        // always value-shaped
  bool trainable = true;
};

// Named, shaped learnable parameters with gradient slots. Ordered map so
// iteration (optimizer steps, serialization, gradient checks) is
// deterministic. Mutation is confined to the single training thread.
class ParamStore {
 public:
  Param& add(const std::string& name, Tensor init, bool trainable = true);
  bool has(const std::string& name) const { return entries_.find(name) != entries_.end(); }
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  Tensor& value(const std::string& name) { return at(name).value; }
  const Tensor& value(const std::string& name) const { return at(name).value; }
  Tensor& grad(const std::string& name) { return at(name).grad; }

  void zero_grads();
  // frozen entries never accumulate gradient; this also clears any stale slot
  void accumulate_grad(const std::string& name, const Tensor& g);
  bool grads_populated() const { return grads_populated_; }

  std::size_t count() const { return entries_.size(); }
  std::size_t trainable_scalar_count() const;

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Param> entries_;
  bool grads_populated_ = false;
};

} // namespace freqseg
