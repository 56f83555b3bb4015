#pragma once

#include "fda/attention.hpp"
#include "fda/encoders.hpp"
#include "fda/fusion.hpp"

namespace fda {

// Ablation ladder, mirroring the baseline comparison rows.
enum class Variant { question_only, image_only, q_plus_i, lstm_q_i, fda };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& s);
std::vector<Variant> all_variants();

struct ModelDims {
    std::size_t embed = 16;
    std::size_t state = 32;
    std::size_t visual = 32;
    std::size_t visual_input = 0;  // 0: feed features directly, else project to this dim
    double threshold = kDefaultMatchThreshold;

    std::size_t effective_visual_input() const {
        return visual_input == 0 ? visual : visual_input;
    }
};

struct ModelForward {
    Tape::Id logits;
    SelectionTrace trace;
};

struct Prediction {
    std::string answer;
    double prob = 0.0;
    SelectionTrace trace;
};

// The full parameter set plus the vocabularies and the frozen matcher space.
struct Model {
    ModelDims dims;
    Vocabulary vocab;
    AnswerVocabulary answers;
    MatcherSpace matcher;

    EmbeddingTable embed;
    LSTMParams qlstm;
    LSTMParams vlstm;
    bool has_vproj = false;
    ParamGroup vproj_w, vproj_b;
    ParamGroup qbow_w, qbow_b;  // bag-of-words path for the Q+I baseline
    ParamGroup vbow_w, vbow_b;
    FusionParams fusion;

    Model() = default;
    Model(ModelDims d, Vocabulary voc, AnswerVocabulary ans, MatcherSpace m);

    void init_params(std::uint64_t seed, double range = 0.08, double forget_bias = 1.0);
    std::vector<ParamGroup*> all_groups();
    void zero_grads();

    ModelForward forward(Tape& tape, const Scene& scene,
                         const std::vector<std::string>& tokens, Variant variant);

    Prediction predict_open_ended(const Scene& scene, const std::vector<std::string>& tokens,
                                  Variant variant = Variant::fda);
    Prediction predict_multiple_choice(const Scene& scene,
                                       const std::vector<std::string>& tokens,
                                       const std::vector<std::string>& choices,
                                       Variant variant = Variant::fda);
};

}  // namespace fda
