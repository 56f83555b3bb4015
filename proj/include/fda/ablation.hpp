#pragma once

#include "fda/training.hpp"

namespace fda {

// Classic ladder-style tables: one row per variant, columns
// All / Y/N / Other / Num, for the open-ended and multiple-choice modes.
struct AblationEntry {
    Variant variant = Variant::fda;
    MetricsTable open;  // averaged over seeds
    MetricsTable mc;
    std::vector<double> open_all_per_seed;
};

struct AblationReport {
    std::vector<std::uint64_t> seeds;
    std::vector<AblationEntry> entries;

    const AblationEntry& entry(Variant v) const;
    std::string to_csv() const;
    std::string to_text() const;
};

// Trains every variant on the shared split, once per seed, and evaluates on
// the test set in both modes. Fully deterministic in (datasets, base, seeds).
AblationReport run_ablation(
    const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
    const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
    const std::function<void(Variant, std::uint64_t, TrainResult&, const TrainConfig&)>&
        on_trained = {});

}  // namespace fda
