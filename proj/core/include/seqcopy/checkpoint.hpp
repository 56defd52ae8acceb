#pragma once

#include <memory>
#include <string>
#include <utility>

#include "seqcopy/model.hpp"
#include "seqcopy/param_store.hpp"

namespace seqcopy {

// Checkpoint layout (format version carried by the magic line):
//   SEQCOPY1\n
//   key=value hyperparameter lines
//   name<TAB>shape(comma-separated)<TAB>f32   one line per tensor
//   (blank line)
//   raw tensor data, little-endian IEEE-754 32-bit, row-major, header order
struct CheckpointHyper {
    int emb_size = 0;
    int hidden = 0;
    int src_vocab = 0;
    int tgt_vocab = 0;
    int max_copy_len = 0;
};

void save_checkpoint(const ParameterStore& store, const CheckpointHyper& hyper,
                     const std::string& path);

std::pair<ParameterStore, CheckpointHyper> load_checkpoint(const std::string& path);

void save_model(const SeqCopyModel& model, const std::string& path);

// Rebuilds a model from a checkpoint; tensor names and shapes must match the
// freshly registered model exactly.
std::unique_ptr<SeqCopyModel> load_model(const std::string& path);

}  // namespace seqcopy
