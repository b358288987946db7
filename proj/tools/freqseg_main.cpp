// freqseg: train / evaluate / ablate / inspect the frequency-guided
// segmentation model on synthetic or user-supplied grayscale images.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "freqseg/dataset.hpp"
#include "freqseg/gradcheck.hpp"
#include "freqseg/image_io.hpp"
#include "freqseg/trainer.hpp"
#include "freqseg/wavelet.hpp"

namespace fs = std::filesystem;
using namespace freqseg;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value config file");
  cmd->add_option("overrides", args.overrides, "key=value config overrides");
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg = load_config(args.config_path, args.overrides);
  cfg.validate();
  return cfg;
}

// channel-mean visualization of one band
Tensor channel_mean(const Tensor& t) {
  Tensor out(1, 1, t.h, t.w);
  for (int ic = 0; ic < t.c; ++ic)
    for (std::size_t i = 0; i < t.plane_size(); ++i) out.data[i] += t.plane(0, ic)[i];
  for (double& v : out.data) v /= t.c;
  return out;
}

void dump_band_images(const Tensor& features, const std::string& dir, const std::string& prefix) {
  WaveletBands bands = haar_decompose(features);
  write_pgm_normalized(channel_mean(bands.ll), dir + "/" + prefix + "_ll.pgm");
  write_pgm_normalized(channel_mean(bands.lh), dir + "/" + prefix + "_lh.pgm");
  write_pgm_normalized(channel_mean(bands.hl), dir + "/" + prefix + "_hl.pgm");
  write_pgm_normalized(channel_mean(bands.hh), dir + "/" + prefix + "_hh.pgm");
}

// two-scale band + attention dumps from a forward pass (model must have the
// frequency stage enabled)
void dump_feature_bands(Model& model, const std::string& out_dir) {
  const Tensor& spatial = model.last_spatial();
  dump_band_images(spatial, out_dir, "scale0");
  dump_band_images(avg_pool2(spatial), out_dir, "scale1");
  const FreqEnhanceOut& enh = model.last_enhance();
  write_pgm_normalized(channel_mean(enh.attn_boundary), out_dir + "/attn_boundary.pgm");
  write_pgm_normalized(channel_mean(enh.attn_structure), out_dir + "/attn_structure.pgm");
}

int cmd_gen(const CommonArgs& args) {
  RunConfig cfg = resolve(args);
  generate_dataset(cfg, cfg.data_dir);
  std::cout << "wrote " << cfg.n << " samples to " << cfg.data_dir << "\n";
  return 0;
}

int cmd_train(const CommonArgs& args, bool resume) {
  RunConfig cfg = resolve(args);
  TrainResult tr = train(cfg, &std::cout, resume);
  std::cout << "best_val_dice=" << tr.best_val_dice << " best_epoch=" << tr.best_epoch
            << " checkpoint=" << tr.best_path << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& ckpt, const std::string& split_name,
             const std::string& report_out) {
  Split split = split_name == "train" ? Split::Train
                                      : (split_name == "val" ? Split::Val : Split::Test);
  RunConfig cfg = resolve(args);
  EvalSummary s = evaluate_checkpoint(ckpt, cfg.data_dir, split);
  const std::string text = eval_report_text(s);
  std::cout << text;
  if (!report_out.empty()) {
    std::ofstream os(report_out);
    if (!os) throw std::runtime_error("cannot write report: " + report_out);
    os << text;
  }
  return 0;
}

int cmd_ablate(const CommonArgs& args) {
  RunConfig cfg = resolve(args);
  std::vector<AblationRow> rows = ablate(cfg, &std::cout);
  const std::string text = ablation_report_text(rows);
  std::cout << text;
  fs::create_directories(cfg.out_dir);
  std::ofstream os(fs::path(cfg.out_dir) / "ablation_report.txt");
  os << text;
  return 0;
}

int cmd_infer(const std::string& ckpt, const std::string& image_path, const std::string& out_dir,
              bool emit_prob, bool dump_bands) {
  LoadedModel lm = load_model(ckpt);
  Tensor image = read_pgm(image_path);
  if (image.h % lm.config.patch != 0 || image.w % lm.config.patch != 0)
    throw std::invalid_argument("image dimensions must be divisible by patch=" +
                                std::to_string(lm.config.patch));
  fs::create_directories(out_dir);

  DualPrediction pred = lm.model->forward(image, lm.params);
  Tensor prob = sigmoid(pred.mask_logits);
  write_mask_pgm(binarize_probs(prob), out_dir + "/mask.pgm");
  if (emit_prob) write_pgm(prob, out_dir + "/mask_prob.pgm");
  if (pred.has_boundary)
    write_pgm(sigmoid(pred.boundary_logits), out_dir + "/boundary.pgm");
  if (lm.model->refiner())
    save_tensor(lm.model->last_proto(), out_dir + "/proto.fqt");
  if (dump_bands) {
    if (!lm.model->enhancer())
      throw std::invalid_argument("--dump-bands needs a checkpoint trained with mfea=1");
    dump_feature_bands(*lm.model, out_dir);
  }
  std::cout << "wrote predictions to " << out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const CommonArgs& args, double eps, double tol) {
  RunConfig cfg = resolve(args);
  Model model(cfg);
  ParamStore ps;
  Rng rng(derive_seed(cfg.seed, "gradcheck-init"));
  model.init(ps, rng);
  perturb_trainable(ps, rng, 0.05); // give zero-initialized paths signal

  Sample sample = make_sample(cfg.seed, 0, cfg.image_size, false);
  auto loss_fn = [&]() {
    DualPrediction pred = model.forward(sample.image, ps);
    return total_loss(pred, sample.mask, cfg.lambda_b, cfg.boundary_radius).total;
  };
  auto loss_and_grad = [&]() {
    DualPrediction pred = model.forward(sample.image, ps);
    return model.loss_and_backward(pred, sample.mask, ps).total;
  };
  GradCheckReport report = grad_check(loss_fn, loss_and_grad, ps, eps, tol);
  std::cout << report.summary();
  return report.all_pass ? 0 : 1;
}

int cmd_dwt(const std::string& image_path, const std::string& out_dir, const std::string& ckpt) {
  Tensor image = read_pgm(image_path);
  fs::create_directories(out_dir);
  if (ckpt.empty()) {
    // raw-image bands at two scales
    if (image.h % 4 != 0 || image.w % 4 != 0)
      throw std::invalid_argument("image dimensions must be divisible by 4 for two scales");
    dump_band_images(image, out_dir, "scale0");
    dump_band_images(avg_pool2(image), out_dir, "scale1");
  } else {
    LoadedModel lm = load_model(ckpt);
    if (!lm.model->enhancer())
      throw std::invalid_argument("dwt with a checkpoint needs mfea=1");
    lm.model->forward(image, lm.params);
    dump_feature_bands(*lm.model, out_dir);
  }
  std::cout << "wrote band dumps to " << out_dir << "\n";
  return 0;
}

int cmd_dump(const std::string& image_path, const std::string& out_path) {
  save_tensor(read_pgm(image_path), out_path);
  return 0;
}

int cmd_load(const std::string& tensor_path, const std::string& out_path) {
  Tensor t = load_tensor(tensor_path);
  if (t.b != 1 || t.c != 1)
    throw std::invalid_argument("load: tensor must be (1,1,H,W) to render as PGM, got " +
                                t.shape_str());
  write_pgm_normalized(t, out_path);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-guided boundary-aware segmentation"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, ablate_args, gc_args;
  bool resume = false;

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen, gen_args);

  CLI::App* trn = app.add_subcommand("train", "train a model");
  add_common(trn, train_args);
  trn->add_flag("--resume", resume, "continue from <out_dir>/last.ckpt");

  std::string eval_ckpt, eval_split = "test", eval_out;
  CLI::App* evl = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  add_common(evl, eval_args);
  evl->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  evl->add_option("--split", eval_split, "train|val|test (default test)");
  evl->add_option("--report", eval_out, "also write the report to this file");

  CLI::App* abl = app.add_subcommand("ablate", "train and compare the four toggle rows");
  add_common(abl, ablate_args);

  std::string infer_ckpt, infer_image, infer_out = "infer_out";
  bool infer_prob = false, infer_bands = false;
  CLI::App* inf = app.add_subcommand("infer", "segment one image");
  inf->add_option("--checkpoint", infer_ckpt)->required();
  inf->add_option("--image", infer_image, "grayscale PGM")->required();
  inf->add_option("--out", infer_out, "output directory");
  inf->add_flag("--prob", infer_prob, "also write the raw probability map");
  inf->add_flag("--dump-bands", infer_bands, "write band and attention images");

  double gc_eps = 1e-5, gc_tol = 1e-4;
  CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  add_common(gc, gc_args);
  gc->add_option("--eps", gc_eps);
  gc->add_option("--tol", gc_tol);

  std::string dwt_image, dwt_out = "dwt_out", dwt_ckpt;
  CLI::App* dwt = app.add_subcommand("dwt", "dump wavelet bands (and attention, with a checkpoint)");
  dwt->add_option("--image", dwt_image)->required();
  dwt->add_option("--out", dwt_out);
  dwt->add_option("--checkpoint", dwt_ckpt, "use feature-level bands from this model");

  std::string dump_img, dump_out, load_tsr, load_out;
  CLI::App* dmp = app.add_subcommand("dump", "convert a PGM image to an FQT1 tensor");
  dmp->add_option("--image", dump_img)->required();
  dmp->add_option("--out", dump_out)->required();
  CLI::App* lod = app.add_subcommand("load", "render an FQT1 tensor as a normalized PGM");
  lod->add_option("--tensor", load_tsr)->required();
  lod->add_option("--out", load_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (trn->parsed()) return cmd_train(train_args, resume);
    if (evl->parsed()) return cmd_eval(eval_args, eval_ckpt, eval_split, eval_out);
    if (abl->parsed()) return cmd_ablate(ablate_args);
    if (inf->parsed()) return cmd_infer(infer_ckpt, infer_image, infer_out, infer_prob, infer_bands);
    if (gc->parsed()) return cmd_gradcheck(gc_args, gc_eps, gc_tol);
    if (dwt->parsed()) return cmd_dwt(dwt_image, dwt_out, dwt_ckpt);
    if (dmp->parsed()) return cmd_dump(dump_img, dump_out);
    if (lod->parsed()) return cmd_load(load_tsr, load_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
