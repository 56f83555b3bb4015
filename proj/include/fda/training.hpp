#pragma once

#include <optional>

#include "fda/model.hpp"
#include "fda/sceneworld.hpp"

namespace fda {

enum class EvalMode { open, mc };

std::string eval_mode_name(EvalMode m);

struct TrainConfig {
    std::uint64_t seed = 7;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 3e-3;
    std::string optimizer = "adam";
    double clip_norm = 5.0;
    double weight_decay = 0.0;  // off by default
    ModelDims dims;
    Variant variant = Variant::fda;

    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

// Accuracy per question type. Empty buckets are absent, not zero; "other"
// aggregates the color and other question types for reporting.
struct MetricsTable {
    std::optional<double> all, yesno, number, other;
    double mean_loss = 0.0;
    std::size_t count = 0;
    std::size_t skipped = 0;  // answers outside the answer vocabulary

    std::string csv_row(std::size_t epoch, const std::string& split, const std::string& mode,
                        const std::string& variant) const;
    static std::string csv_header();
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    MetricsTable val;  // open-ended
};

struct TrainResult {
    Model model;  // best-validation parameters
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    bool diverged = false;
    std::string diagnostic;
};

// Mean cross-entropy over the batch under the variant's input gating. When
// with_grad is set, gradients are accumulated into the model (caller zeroes).
double batch_loss(Model& model, const Dataset& ds, const std::vector<std::size_t>& indices,
                  Variant variant, bool with_grad, std::size_t* skipped = nullptr);

// Adam with global-norm gradient clipping.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<ParamGroup*> params, double lr, double clip_norm,
                  double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    // Returns the pre-clip global gradient norm.
    double step();

private:
    std::vector<ParamGroup*> params_;
    std::vector<Matrix> m_, v_;
    double lr_, clip_, wd_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

// Vocabulary, answer set (optionally top-K) and matcher space all derived
// from the given split; parameters seeded from cfg.seed.
Model build_model_from_data(const TrainConfig& cfg, const Dataset& ds,
                            std::size_t top_k_answers = 0);

// Builds the model (vocabulary, answers, matcher) from the training split
// and runs the optimization loop. Deterministic in (config, datasets).
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set);

MetricsTable evaluate(Model& model, const Dataset& ds, EvalMode mode, Variant variant);

// Matcher space derived from the data itself: object labels are canonical,
// question tokens of the form "<label>s" are synonyms of that label.
MatcherSpace build_matcher_from_data(const Dataset& ds);

// Finite-difference check of the whole model under one variant's gating.
// Only trainable groups are checked.
GradCheckReport model_grad_check(Model& model, const Dataset& ds,
                                 const std::vector<std::size_t>& indices, Variant variant,
                                 double step = 1e-5, double tolerance = 1e-4);

}  // namespace fda
