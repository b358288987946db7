#pragma once

#include <map>
#include <string>

#include "freqseg/config.hpp"
#include "freqseg/optimizer.hpp"
#include "freqseg/params.hpp"

namespace freqseg {

// Sectioned container: a greppable text manifest followed by concatenated
// FQT1 tensor blobs.
//
//   FQC1
//   meta <key>=<value>            (epoch, step, best_val_dice, ...)
//   cfg <key>=<value>             (the full RunConfig, so eval can rebuild)
//   tensor <name> <section> <trainable> <b> <c> <h> <w> <offset> <bytes>
//   END
//   <binary payload>
//
// Sections are the leading name component (backbone/mfea/fgbr/mbgd/optim).
// Optimizer moments are stored as optim.m.<name> / optim.v.<name> so a resume
// continues the exact trajectory.
struct Checkpoint {
  RunConfig config;
  std::map<std::string, std::string> meta;
  ParamStore params;                 // model tensors, with trainable flags
  std::map<std::string, Adam::Slot> optim; // per-parameter moments
  long optim_step = 0;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

Checkpoint snapshot(const RunConfig& cfg, const ParamStore& ps, const Adam* adam,
                    const std::map<std::string, std::string>& meta);

} // namespace freqseg
