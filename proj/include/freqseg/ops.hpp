#pragma once

#include <string>
#include <vector>

#include "freqseg/params.hpp"
#include "freqseg/rng.hpp"
#include "freqseg/tensor.hpp"

namespace freqseg {

// ---------------------------------------------------------------------------
// functional core: pure tensor-in/tensor-out operators plus explicit adjoints
// ---------------------------------------------------------------------------

// w has shape (Cout, Cin, kh, kw); bias (1, Cout, 1, 1).
// Output (B, Cout, H', W'), H' = (H + 2*pad - kh)/stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int pad);
// gx may be null when the input gradient is not needed (e.g. first layer).
void conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy, int stride, int pad,
                     Tensor* gx, Tensor& gw, Tensor& gb);

// 2x2 stride-2 transposed conv; w has shape (Cin, Cout, 2, 2); output (B, Cout, 2H, 2W).
// Adjoint of conv2d(. , w, 0, stride=2, pad=0) with the same kernel array.
Tensor transposed_conv2d(const Tensor& x, const Tensor& w, const Tensor& bias);
void transposed_conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                                Tensor* gx, Tensor& gw, Tensor& gb);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b); // Hadamard
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& x);
void relu_backward(const Tensor& x, const Tensor& gy, Tensor& gx); // accumulates
Tensor sigmoid(const Tensor& x);
void sigmoid_backward(const Tensor& y, const Tensor& gy, Tensor& gx); // y = sigmoid(x); accumulates

Tensor concat_channels(const std::vector<const Tensor*>& parts);
// splits gy back into gradients shaped like the forward parts
std::vector<Tensor> split_channels(const Tensor& gy, const std::vector<int>& channel_counts);

Tensor softmax_channels(const Tensor& x);     // softmax over C at each (b, y, x)
void softmax_vec(double* v, int n);           // in-place, max-subtracted

Tensor avg_pool2(const Tensor& x);                       // H, W even; factor 2
Tensor avg_pool2_backward(const Tensor& gy);             // scatter gy/4 up to (2H, 2W)

// corner-aligned bilinear resize to (H, W)
Tensor upsample_bilinear(const Tensor& x, int out_h, int out_w);
Tensor upsample_bilinear_backward(const Tensor& gy, int in_h, int in_w);

// mean over the spatial plane: (B, C, H, W) -> (B, C, 1, 1)
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& gy, int in_h, int in_w);

// ---------------------------------------------------------------------------
// layers: named parameters in a ParamStore plus a cached forward input, so
// backward is explicit and layer-local (fixed DAG, no tape)
// ---------------------------------------------------------------------------

enum class Init { He, Zero };

class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(std::string name, int cin, int cout, int k, int stride, int pad);
  void init(ParamStore& ps, Rng& rng, bool trainable = true, Init kind = Init::He);
  Tensor forward(const Tensor& x, ParamStore& ps);
  // accumulates weight grads (respecting the trainable flag), returns gx
  Tensor backward(const Tensor& gy, ParamStore& ps, bool need_gx = true);
  const std::string& name() const { return name_; }
  int cin() const { return cin_; }
  int cout() const { return cout_; }
  std::size_t param_count() const {
    return static_cast<std::size_t>(cout_) * cin_ * k_ * k_ + cout_;
  }

 private:
  std::string name_;
  int cin_ = 0, cout_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
  Tensor x_;
};

class TConv2dLayer {
 public:
  TConv2dLayer() = default;
  TConv2dLayer(std::string name, int cin, int cout);
  void init(ParamStore& ps, Rng& rng, bool trainable = true);
  Tensor forward(const Tensor& x, ParamStore& ps);
  Tensor backward(const Tensor& gy, ParamStore& ps, bool need_gx = true);
  int cout() const { return cout_; }
  std::size_t param_count() const { return static_cast<std::size_t>(cin_) * cout_ * 4 + cout_; }

 private:
  std::string name_;
  int cin_ = 0, cout_ = 0;
  Tensor x_;
};

} // namespace freqseg
