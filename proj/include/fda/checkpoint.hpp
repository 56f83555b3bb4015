#pragma once

#include "fda/training.hpp"

namespace fda {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    TrainConfig config;
    Model model;
    std::size_t epoch = 0;
    double val_metric = 0.0;
};

// Single file: one JSON header line (config, vocabularies, matcher words,
// group names and shapes), then per group a little-endian u64 element count
// followed by that many little-endian f64 values. The frozen matcher
// embedding matrix rides along as the pseudo-group "matcher.embeddings".
void save_checkpoint(const std::string& path, Model& model, const TrainConfig& config,
                     std::size_t epoch, double val_metric);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fda
