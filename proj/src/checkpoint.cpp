#include "freqseg/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "freqseg/tensor.hpp"

namespace freqseg {

namespace {

std::string section_of(const std::string& name) {
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::size_t fqt_bytes(const Tensor& t) {
  return 4 + 4 + 4 * 4 + t.size() * sizeof(double);
}

} // namespace

void Checkpoint::save(const std::string& path) const {
  // gather every tensor that goes into the payload, in manifest order
  std::vector<std::pair<std::string, const Tensor*>> blobs;
  std::vector<std::string> lines;

  std::ostringstream head;
  head << "FQC1\n";
  head << "meta optim_step=" << optim_step << "\n";
  for (const auto& [k, v] : meta) head << "meta " << k << "=" << v << "\n";
  {
    std::istringstream cfg_lines(config.to_string());
    std::string l;
    while (std::getline(cfg_lines, l)) head << "cfg " << l << "\n";
  }

  std::size_t offset = 0;
  auto emit = [&](const std::string& name, const Tensor& t, bool trainable) {
    std::ostringstream os;
    os << "tensor " << name << " " << section_of(name) << " " << (trainable ? 1 : 0) << " " << t.b
       << " " << t.c << " " << t.h << " " << t.w << " " << offset << " " << fqt_bytes(t);
    lines.push_back(os.str());
    blobs.emplace_back(name, &t);
    offset += fqt_bytes(t);
  };

  for (const auto& [name, p] : params) emit(name, p.value, p.trainable);
  for (const auto& [name, slot] : optim) {
    emit("optim.m." + name, slot.m, false);
    emit("optim.v." + name, slot.v, false);
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for write: " + path);
  os << head.str();
  for (const auto& l : lines) os << l << "\n";
  os << "END\n";
  for (const auto& [name, t] : blobs) write_fqt(*t, os);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "FQC1")
    throw std::runtime_error("not a checkpoint file (bad magic): " + path);

  Checkpoint ck;
  struct Rec {
    std::string name;
    bool trainable;
  };
  std::vector<Rec> order;
  while (std::getline(is, line)) {
    if (line == "END") break;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "meta") {
      std::string kv;
      std::getline(ss, kv);
      const auto b = kv.find_first_not_of(' ');
      kv = b == std::string::npos ? "" : kv.substr(b);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::runtime_error("bad meta line: " + line);
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "optim_step") ck.optim_step = std::stol(v);
      else ck.meta[k] = v;
    } else if (tag == "cfg") {
      std::string kv;
      std::getline(ss, kv);
      const auto b = kv.find_first_not_of(' ');
      if (b != std::string::npos) apply_override(ck.config, kv.substr(b));
    } else if (tag == "tensor") {
      Rec r;
      std::string section;
      int trainable, b, c, h, w;
      std::size_t off, bytes;
      ss >> r.name >> section >> trainable >> b >> c >> h >> w >> off >> bytes;
      if (!ss) throw std::runtime_error("bad tensor line: " + line);
      r.trainable = trainable != 0;
      order.push_back(r);
    } else if (!tag.empty()) {
      throw std::runtime_error("unknown checkpoint line: " + line);
    }
  }

  for (const auto& r : order) {
    Tensor t = read_fqt(is);
    if (r.name.rfind("optim.m.", 0) == 0) {
      ck.optim[r.name.substr(8)].m = std::move(t);
    } else if (r.name.rfind("optim.v.", 0) == 0) {
      ck.optim[r.name.substr(8)].v = std::move(t);
    } else {
      ck.params.add(r.name, std::move(t), r.trainable);
    }
  }
  return ck;
}

Checkpoint snapshot(const RunConfig& cfg, const ParamStore& ps, const Adam* adam,
                    const std::map<std::string, std::string>& meta) {
  Checkpoint ck;
  ck.config = cfg;
  ck.meta = meta;
  for (const auto& [name, p] : ps) ck.params.add(name, p.value, p.trainable);
  if (adam) {
    ck.optim = adam->slots();
    ck.optim_step = adam->step_count();
  }
  return ck;
}

} // namespace freqseg
