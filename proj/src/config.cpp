#include "freqseg/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace freqseg {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

std::string RunConfig::to_string() const {
  std::ostringstream os;
  os << "image_size=" << image_size << "\n"
     << "patch=" << patch << "\n"
     << "channels=" << channels << "\n"
     << "depth=" << depth << "\n"
     << "adapter_dim=" << adapter_dim << "\n"
     << "freeze_body=" << freeze_body << "\n"
     << "mfea=" << mfea << "\n"
     << "fgbr=" << fgbr << "\n"
     << "mbgd=" << mbgd << "\n"
     << "lambda=" << fmt(lambda) << "\n"
     << "alpha0=" << fmt(alpha0) << "\n"
     << "beta0=" << fmt(beta0) << "\n"
     << "omega0=" << fmt(omega0) << "\n"
     << "lambda_b=" << fmt(lambda_b) << "\n"
     << "heads=" << heads << "\n"
     << "head_dim=" << head_dim << "\n"
     << "proto_dim=" << proto_dim << "\n"
     << "proto_tokens=" << proto_tokens << "\n"
     << "distill_hidden=" << distill_hidden << "\n"
     << "boundary_feat=" << boundary_feat << "\n"
     << "up_blocks=" << up_blocks << "\n"
     << "boundary_radius=" << boundary_radius << "\n"
     << "hd_spacing=" << fmt(hd_spacing) << "\n"
     << "hd_percentile=" << hd_percentile << "\n"
     << "lr=" << fmt(lr) << "\n"
     << "lr_decay=" << fmt(lr_decay) << "\n"
     << "batch=" << batch << "\n"
     << "epochs=" << epochs << "\n"
     << "seed=" << seed << "\n"
     << "split=" << split_train << ":" << split_val << ":" << split_test << "\n"
     << "n=" << n << "\n"
     << "shift=" << shift << "\n"
     << "data_dir=" << data_dir << "\n"
     << "out_dir=" << out_dir << "\n";
  return os.str();
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_string()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void RunConfig::validate() const {
  std::vector<std::string> errs;
  auto bad = [&errs](const std::string& msg) { errs.push_back(msg); };

  if (patch != 16)
    bad("patch must be 16: four 2x2 up-blocks give a fixed x16 decode back to image resolution");
  if (image_size < patch || image_size % patch != 0)
    bad("image_size must be a positive multiple of patch (" + std::to_string(patch) + ")");
  else {
    const int g = grid();
    if (g < 4 || g % 4 != 0)
      bad("feature grid image_size/patch must be >= 4 and divisible by 4 (two frequency scales); "
          "got " + std::to_string(g));
  }
  if (channels < 8 || channels % 4 != 0)
    bad("channels must be >= 8 and divisible by 4");
  if (adapter_dim < 1 || adapter_dim >= channels)
    bad("adapter_dim must be in [1, channels)");
  if (depth < 1) bad("depth must be >= 1");
  if (head_dim == 0 && channels % heads != 0)
    bad("channels must be divisible by heads when head_dim=0 (auto)");
  if (heads < 1) bad("heads must be >= 1");
  if (proto_dim < 1) bad("proto_dim must be >= 1");
  if (proto_tokens < 1) bad("proto_tokens must be >= 1");
  if (distill_hidden < 1) bad("distill_hidden must be >= 1");
  if (boundary_feat < 1) bad("boundary_feat must be >= 1");
  if (up_blocks != 4) bad("up_blocks must be 4 (fixed x16 decode)");
  if (fgbr && !mfea) bad("fgbr requires mfea: it consumes the high-frequency features");
  if (lambda_b < 0.0) bad("lambda_b must be >= 0");
  if (boundary_radius < 1) bad("boundary_radius must be >= 1");
  if (hd_percentile < 1 || hd_percentile > 100) bad("hd_percentile must be in [1,100]");
  if (hd_spacing <= 0.0) bad("hd_spacing must be > 0");
  if (lr <= 0.0) bad("lr must be > 0");
  if (lr_decay <= 0.0 || lr_decay > 1.0) bad("lr_decay must be in (0,1]");
  if (batch < 1) bad("batch must be >= 1");
  if (epochs < 1) bad("epochs must be >= 1");
  if (n < 1) bad("n must be >= 1");
  if (split_train < 1 || split_val < 0 || split_test < 0)
    bad("split must be train:val:test with train >= 1 and val,test >= 0");

  if (!errs.empty()) {
    std::string all = "invalid configuration:";
    for (const auto& e : errs) all += "\n  - " + e;
    throw std::invalid_argument(all);
  }
}

void apply_override(RunConfig& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must be key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq);
  const std::string val = kv.substr(eq + 1);

  auto to_i = [&](const std::string& v) {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad integer for " + key + ": '" + v + "'");
    return r;
  };
  auto to_d = [&](const std::string& v) {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
    return r;
  };

  if (key == "preset") {
    if (val == "desk") {
      cfg.image_size = 64;
      cfg.channels = 64;
      cfg.head_dim = 0;
      cfg.adapter_dim = 16;
    } else if (val == "fidelity") {
      // paper-scale geometry: 512x512 inputs, wide embedding, D = heads*128
      cfg.image_size = 512;
      cfg.channels = 1024;
      cfg.head_dim = 128;
      cfg.adapter_dim = 64;
    } else {
      throw std::invalid_argument("unknown preset '" + val + "' (desk|fidelity)");
    }
  } else if (key == "image_size") cfg.image_size = to_i(val);
  else if (key == "patch") cfg.patch = to_i(val);
  else if (key == "channels") cfg.channels = to_i(val);
  else if (key == "depth") cfg.depth = to_i(val);
  else if (key == "adapter_dim") cfg.adapter_dim = to_i(val);
  else if (key == "freeze_body") cfg.freeze_body = to_i(val);
  else if (key == "mfea") cfg.mfea = to_i(val);
  else if (key == "fgbr") cfg.fgbr = to_i(val);
  else if (key == "mbgd") cfg.mbgd = to_i(val);
  else if (key == "lambda") cfg.lambda = to_d(val);
  else if (key == "alpha0") cfg.alpha0 = to_d(val);
  else if (key == "beta0") cfg.beta0 = to_d(val);
  else if (key == "omega0") cfg.omega0 = to_d(val);
  else if (key == "lambda_b") cfg.lambda_b = to_d(val);
  else if (key == "heads") cfg.heads = to_i(val);
  else if (key == "head_dim") cfg.head_dim = to_i(val);
  else if (key == "proto_dim") cfg.proto_dim = to_i(val);
  else if (key == "proto_tokens") cfg.proto_tokens = to_i(val);
  else if (key == "distill_hidden") cfg.distill_hidden = to_i(val);
  else if (key == "boundary_feat") cfg.boundary_feat = to_i(val);
  else if (key == "up_blocks") cfg.up_blocks = to_i(val);
  else if (key == "boundary_radius") cfg.boundary_radius = to_i(val);
  else if (key == "hd_spacing") cfg.hd_spacing = to_d(val);
  else if (key == "hd_percentile") cfg.hd_percentile = to_i(val);
  else if (key == "lr") cfg.lr = to_d(val);
  else if (key == "lr_decay") cfg.lr_decay = to_d(val);
  else if (key == "batch") cfg.batch = to_i(val);
  else if (key == "epochs") cfg.epochs = to_i(val);
  else if (key == "seed") cfg.seed = std::stoull(val);
  else if (key == "split") {
    std::istringstream ss(val);
    char c1 = 0, c2 = 0;
    if (!(ss >> cfg.split_train >> c1 >> cfg.split_val >> c2 >> cfg.split_test) || c1 != ':' ||
        c2 != ':')
      throw std::invalid_argument("split must be train:val:test, got '" + val + "'");
  } else if (key == "n") cfg.n = to_i(val);
  else if (key == "shift") cfg.shift = to_i(val);
  else if (key == "data_dir") cfg.data_dir = val;
  else if (key == "out_dir") cfg.out_dir = val;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig load_config(const std::string& path_or_empty,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!path_or_empty.empty()) {
    std::ifstream is(path_or_empty);
    if (!is) throw std::runtime_error("cannot open config file: " + path_or_empty);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto h = line.find('#');
      if (h != std::string::npos) line = line.substr(0, h);
      // trim
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      line = line.substr(b, e - b + 1);
      try {
        apply_override(cfg, line);
      } catch (const std::invalid_argument& ex) {
        throw std::invalid_argument(path_or_empty + ":" + std::to_string(lineno) + ": " +
                                    ex.what());
      }
    }
  }
  for (const auto& kv : overrides) apply_override(cfg, kv);
  if (const char* env = std::getenv("FREQSEG_SEED")) cfg.seed = std::stoull(env);
  return cfg;
}

} // namespace freqseg
