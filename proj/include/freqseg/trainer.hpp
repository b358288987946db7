#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freqseg/checkpoint.hpp"
#include "freqseg/dataset.hpp"
#include "freqseg/metrics.hpp"
#include "freqseg/model.hpp"

namespace freqseg {

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0, mask = 0.0, boundary = 0.0;
  double val_dice = -1.0; // -1 when the val split is empty
};

struct TrainResult {
  std::vector<EpochLog> log;
  double final_loss = 0.0;
  double best_val_dice = -1.0;
  int best_epoch = -1;
  std::string best_path, last_path;
};

// end-to-end training on the dataset in cfg.data_dir; writes last.ckpt every
// epoch and best.ckpt on validation improvement (last == best when the val
// split is empty). resume picks up from last.ckpt exactly.
TrainResult train(const RunConfig& cfg, std::ostream* log_stream, bool resume = false);

struct EvalSummary {
  struct Row {
    std::string id;
    EvalRecord rec;
  };
  std::vector<Row> per_image;
  double mean_dice = 0.0, mean_miou = 0.0, mean_hd = 0.0;
  int sentinel_count = 0;
  double trivial_fg_dice = 0.0; // all-foreground predictor baseline on this split
  int n = 0;
};

EvalSummary evaluate_model(Model& model, ParamStore& ps, const Dataset& ds, Split split,
                           double spacing, int hd_percentile);
EvalSummary evaluate_checkpoint(const std::string& ckpt_path, const std::string& data_dir,
                                Split split);
std::string eval_report_text(const EvalSummary& s);

// model + params directly from a checkpoint
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<Model> model;
  ParamStore params;
};
LoadedModel load_model(const std::string& ckpt_path);

struct AblationRow {
  std::string name;
  int mfea = 0, fgbr = 0, mbgd = 0;
  EvalSummary eval;
  std::string config_hash;
};

// the four toggle rows (none / mfea / mfea+fgbr / all) trained on the shared
// dataset and seed, evaluated on the test split
std::vector<AblationRow> ablate(const RunConfig& cfg, std::ostream* log_stream);
std::string ablation_report_text(const std::vector<AblationRow>& rows);

} // namespace freqseg
