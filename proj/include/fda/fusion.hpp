#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "fda/numerics.hpp"
#include "fda/rng.hpp"

namespace fda {

// Closed answer set: top-K training answers, descending frequency then
// lexicographic, densely indexed.
class AnswerVocabulary {
public:
    AnswerVocabulary() = default;
    static AnswerVocabulary build(const std::vector<std::string>& answers, std::size_t top_k = 0);
    static AnswerVocabulary from_list(std::vector<std::string> answers);

    bool contains(const std::string& a) const { return index_.count(a) > 0; }
    std::size_t index(const std::string& a) const;
    const std::string& answer(std::size_t i) const;
    std::size_t size() const { return answers_.size(); }
    const std::vector<std::string>& answers() const { return answers_; }

    bool operator==(const AnswerVocabulary& o) const { return answers_ == o.answers_; }

private:
    std::vector<std::string> answers_;
    std::unordered_map<std::string, std::size_t> index_;
};

// FC stack after the elementwise fusion: one tanh hidden layer of the state
// width, then the K-way classifier.
struct FusionParams {
    ParamGroup fc_w, fc_b;    // state x state
    ParamGroup cls_w, cls_b;  // K x state

    FusionParams() = default;
    FusionParams(std::size_t state_dim, std::size_t num_answers);
    void init(double range, Rng& rng);
    std::vector<ParamGroup*> groups();
};

// tanh(q) * relu(v), elementwise.
Tape::Id fuse(Tape& tape, Tape::Id q_state, Tape::Id v_state);

// Logits over the answer set; softmax is applied by the caller (or fused
// into the loss).
Tape::Id classify_logits(Tape& tape, Tape::Id fused, FusionParams& params);

}  // namespace fda
