#include "freqseg/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace freqseg {

namespace {

Tensor stack_images(const std::vector<Sample>& samples, const std::vector<int>& idx, bool mask) {
  const Tensor& first = mask ? samples[idx[0]].mask : samples[idx[0]].image;
  Tensor out(static_cast<int>(idx.size()), 1, first.h, first.w);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Tensor& src = mask ? samples[idx[i]].mask : samples[idx[i]].image;
    std::copy(src.data.begin(), src.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(i * src.size()));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

double val_dice_of(Model& model, ParamStore& ps, const std::vector<Sample>& samples) {
  if (samples.empty()) return -1.0;
  double acc = 0.0;
  for (const auto& s : samples) {
    DualPrediction pred = model.forward(s.image, ps);
    acc += dice(binarize_probs(sigmoid(pred.mask_logits)), s.mask);
  }
  return acc / static_cast<double>(samples.size());
}

} // namespace

TrainResult train(const RunConfig& cfg, std::ostream* log_stream, bool resume) {
  cfg.validate();
  Dataset ds = Dataset::load(cfg.data_dir);
  if (ds.image_size() != cfg.image_size)
    throw std::invalid_argument("dataset image size " + std::to_string(ds.image_size()) +
                                " does not match config image_size " +
                                std::to_string(cfg.image_size));

  std::vector<Sample> train_samples, val_samples;
  for (int i : ds.indices(Split::Train)) train_samples.push_back(ds.load_sample(i));
  for (int i : ds.indices(Split::Val)) val_samples.push_back(ds.load_sample(i));
  if (train_samples.empty()) throw std::invalid_argument("train split is empty");

  fs::create_directories(cfg.out_dir);
  const std::string last_path = (fs::path(cfg.out_dir) / "last.ckpt").string();
  const std::string best_path = (fs::path(cfg.out_dir) / "best.ckpt").string();

  Model model(cfg);
  ParamStore ps;
  AdamConfig ac;
  ac.lr0 = cfg.lr;
  ac.decay = cfg.lr_decay;
  Adam adam(ac);

  int start_epoch = 0;
  TrainResult result;
  result.best_path = best_path;
  result.last_path = last_path;

  if (resume && fs::exists(last_path)) {
    Checkpoint ck = Checkpoint::load(last_path);
    if (ck.config.hash() != cfg.hash())
      throw std::invalid_argument("resume: checkpoint config differs from the requested config");
    ps = std::move(ck.params);
    adam.slots() = std::move(ck.optim);
    adam.set_step_count(ck.optim_step);
    start_epoch = std::stoi(ck.meta.at("epochs_done"));
    if (ck.meta.count("best_val_dice")) result.best_val_dice = std::stod(ck.meta.at("best_val_dice"));
    if (ck.meta.count("best_epoch")) result.best_epoch = std::stoi(ck.meta.at("best_epoch"));
  } else {
    Rng init_rng(derive_seed(cfg.seed, "init"));
    model.init(ps, init_rng);
  }

  std::ofstream log_file(fs::path(cfg.out_dir) / "train_log.txt",
                         start_epoch > 0 ? std::ios::app : std::ios::trunc);

  std::vector<int> order(train_samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double sum_total = 0.0, sum_mask = 0.0, sum_boundary = 0.0;
    std::size_t seen = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch) {
      const std::size_t take = std::min<std::size_t>(cfg.batch, order.size() - pos);
      std::vector<int> batch_idx(order.begin() + pos, order.begin() + pos + take);
      Tensor images = stack_images(train_samples, batch_idx, false);
      Tensor masks = stack_images(train_samples, batch_idx, true);

      ps.zero_grads();
      DualPrediction pred = model.forward(images, ps);
      LossBreakdown lb = model.loss_and_backward(pred, masks, ps);
      adam.step(ps, epoch);

      sum_total += lb.total * static_cast<double>(take);
      sum_mask += lb.mask * static_cast<double>(take);
      sum_boundary += lb.boundary * static_cast<double>(take);
      seen += take;
    }

    EpochLog el;
    el.epoch = epoch;
    el.lr = adam.lr_for_epoch(epoch);
    el.total = sum_total / static_cast<double>(seen);
    el.mask = sum_mask / static_cast<double>(seen);
    el.boundary = sum_boundary / static_cast<double>(seen);
    el.val_dice = val_dice_of(model, ps, val_samples);
    result.log.push_back(el);
    result.final_loss = el.total;

    const std::string line = "epoch=" + std::to_string(el.epoch) + " lr=" + fmt(el.lr) +
                             " loss=" + fmt(el.total) + " mask=" + fmt(el.mask) + " boundary=" +
                             fmt(el.boundary) + " val_dice=" + fmt(el.val_dice);
    if (log_stream) *log_stream << line << "\n";
    log_file << line << "\n";

    const bool improved = val_samples.empty() || el.val_dice > result.best_val_dice;
    if (improved) {
      result.best_val_dice = el.val_dice;
      result.best_epoch = epoch;
    }
    std::map<std::string, std::string> meta{
        {"epochs_done", std::to_string(epoch + 1)},
        {"best_val_dice", fmt(result.best_val_dice)},
        {"best_epoch", std::to_string(result.best_epoch)},
        {"final_loss", fmt(el.total)},
    };
    Checkpoint ck = snapshot(cfg, ps, &adam, meta);
    ck.save(last_path);
    if (improved) ck.save(best_path);
  }
  return result;
}

EvalSummary evaluate_model(Model& model, ParamStore& ps, const Dataset& ds, Split split,
                           double spacing, int hd_percentile) {
  EvalSummary out;
  double fg_dice_acc = 0.0;
  for (int idx : ds.indices(split)) {
    Sample s = ds.load_sample(idx);
    DualPrediction pred = model.forward(s.image, ps);
    Tensor bin = binarize_probs(sigmoid(pred.mask_logits));
    EvalSummary::Row row;
    row.id = s.id;
    row.rec = evaluate_masks(bin, s.mask, spacing, hd_percentile);
    out.sentinel_count += row.rec.hd_sentinel ? 1 : 0;
    out.mean_dice += row.rec.dice;
    out.mean_miou += row.rec.miou;
    out.mean_hd += row.rec.hd;
    out.per_image.push_back(std::move(row));

    double fg = 0.0;
    for (double v : s.mask.data) fg += v;
    fg_dice_acc += 2.0 * fg / (fg + static_cast<double>(s.mask.size()));
  }
  out.n = static_cast<int>(out.per_image.size());
  if (out.n > 0) {
    out.mean_dice /= out.n;
    out.mean_miou /= out.n;
    out.mean_hd /= out.n;
    out.trivial_fg_dice = fg_dice_acc / out.n;
  }
  return out;
}

LoadedModel load_model(const std::string& ckpt_path) {
  Checkpoint ck = Checkpoint::load(ckpt_path);
  ck.config.validate();
  LoadedModel lm;
  lm.config = ck.config;
  lm.model = std::make_unique<Model>(ck.config);
  lm.params = std::move(ck.params);

  // the loaded tensors must cover exactly what a fresh init would create
  ParamStore fresh;
  Rng rng(0);
  Model probe(ck.config);
  probe.init(fresh, rng);
  for (const auto& [name, p] : fresh) {
    if (!lm.params.has(name))
      throw std::invalid_argument("checkpoint is missing tensor " + name);
    if (!lm.params.value(name).same_shape(p.value))
      throw std::invalid_argument("checkpoint tensor " + name + " has shape " +
                                  lm.params.value(name).shape_str() + ", model expects " +
                                  p.value.shape_str());
  }
  return lm;
}

EvalSummary evaluate_checkpoint(const std::string& ckpt_path, const std::string& data_dir,
                                Split split) {
  LoadedModel lm = load_model(ckpt_path);
  Dataset ds = Dataset::load(data_dir);
  if (ds.image_size() != lm.config.image_size)
    throw std::invalid_argument("dataset image size " + std::to_string(ds.image_size()) +
                                " does not match checkpoint image_size " +
                                std::to_string(lm.config.image_size));
  return evaluate_model(*lm.model, lm.params, ds, split, lm.config.hd_spacing,
                        lm.config.hd_percentile);
}

std::string eval_report_text(const EvalSummary& s) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (const auto& row : s.per_image)
    os << "image id=" << row.id << " dice=" << row.rec.dice << " miou=" << row.rec.miou
       << " hd=" << row.rec.hd << " hd_sentinel=" << (row.rec.hd_sentinel ? 1 : 0) << "\n";
  os << "aggregate n=" << s.n << " dice=" << s.mean_dice << " miou=" << s.mean_miou
     << " hd=" << s.mean_hd << " hd_sentinel_count=" << s.sentinel_count
     << " trivial_fg_dice=" << s.trivial_fg_dice << "\n";
  return os.str();
}

std::vector<AblationRow> ablate(const RunConfig& cfg, std::ostream* log_stream) {
  struct RowSpec {
    const char* name;
    int mfea, fgbr, mbgd;
  };
  // toggle rows in the ablation-table order: none / mfea / mfea+fgbr / all
  static const RowSpec rows[] = {
      {"baseline", 0, 0, 0}, {"mfea", 1, 0, 0}, {"mfea_fgbr", 1, 1, 0}, {"full", 1, 1, 1}};

  std::vector<AblationRow> out;
  for (const auto& spec : rows) {
    RunConfig rc = cfg;
    rc.mfea = spec.mfea;
    rc.fgbr = spec.fgbr;
    rc.mbgd = spec.mbgd;
    rc.out_dir = (fs::path(cfg.out_dir) / spec.name).string();
    if (log_stream) *log_stream << "# training row " << spec.name << "\n";
    TrainResult tr = train(rc, nullptr, false);
    AblationRow row;
    row.name = spec.name;
    row.mfea = spec.mfea;
    row.fgbr = spec.fgbr;
    row.mbgd = spec.mbgd;
    row.config_hash = rc.hash();
    row.eval = evaluate_checkpoint(tr.best_path, rc.data_dir, Split::Test);
    if (log_stream)
      *log_stream << "# row " << spec.name << " test dice=" << row.eval.mean_dice << "\n";
    out.push_back(std::move(row));
  }
  return out;
}

std::string ablation_report_text(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(12);
  for (const auto& r : rows)
    os << "row name=" << r.name << " mfea=" << r.mfea << " fgbr=" << r.fgbr << " mbgd=" << r.mbgd
       << " dice=" << r.eval.mean_dice << " miou=" << r.eval.mean_miou << " hd=" << r.eval.mean_hd
       << " config_hash=" << r.config_hash << "\n";
  if (!rows.empty()) {
    const auto& base = rows.front().eval;
    for (const auto& r : rows)
      os << "delta name=" << r.name << " dice=" << (r.eval.mean_dice - base.mean_dice)
         << " miou=" << (r.eval.mean_miou - base.mean_miou)
         << " hd=" << (r.eval.mean_hd - base.mean_hd) << "\n";
  }
  return os.str();
}

} // namespace freqseg
