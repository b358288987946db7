#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace freqseg {

// All run settings, every random choice downstream derives from `seed`.
// Serialized as fixed-order key=value lines; the same format is accepted from
// config files and command-line overrides.
struct RunConfig {
  // model geometry
  int image_size = 64;   // desk scale; fidelity preset uses 512
  int patch = 16;
  int channels = 64;
  int depth = 2;
  int adapter_dim = 16;
  int freeze_body = 1;

  // module toggles (ablation rows)
  int mfea = 1;
  int fgbr = 1;
  int mbgd = 1;

  // equation constants
  double lambda = 0.3;    // residual fusion weight of the enhancement stage (fixed)
  double alpha0 = 0.5;    // learnable attention mixes, initial values
  double beta0 = 0.5;
  double omega0 = 0.2;    // learnable refinement residual weight, initial value
  double lambda_b = 0.3;  // boundary loss weight

  // refinement stage
  int heads = 8;
  int head_dim = 0;       // 0 = channels/heads
  int proto_dim = 64;
  int proto_tokens = 1;
  int distill_hidden = 256;

  // decoder
  int boundary_feat = 16;
  int up_blocks = 4;      // fixed by the x16 patch geometry; validated

  // supervision / metrics
  int boundary_radius = 1;
  double hd_spacing = 1.0;   // pixels -> physical units multiplier
  int hd_percentile = 100;   // 100 = full Hausdorff

  // training
  double lr = 1e-4;
  double lr_decay = 0.98;
  int batch = 16;
  int epochs = 300;
  std::uint64_t seed = 0;
  int split_train = 8, split_val = 1, split_test = 1;

  // dataset generation
  int n = 100;
  int shift = 0; // 1 = distribution-shift preset (stronger blur/noise, lower contrast)

  std::string data_dir = "data";
  std::string out_dir = "out";

  int grid() const { return image_size / patch; }

  std::string to_string() const;      // fixed field order
  std::string hash() const;           // FNV-1a over to_string, hex
  // throws std::invalid_argument listing every violation
  void validate() const;
};

// file of key=value lines ('#' comments); then overrides; then FREQSEG_SEED
RunConfig load_config(const std::string& path_or_empty,
                      const std::vector<std::string>& overrides);
void apply_override(RunConfig& cfg, const std::string& kv);

} // namespace freqseg
