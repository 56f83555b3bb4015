#include "fda/fusion.hpp"

#include <algorithm>
#include <map>

namespace fda {

AnswerVocabulary AnswerVocabulary::build(const std::vector<std::string>& answers,
                                         std::size_t top_k) {
    if (answers.empty()) throw Error("AnswerVocabulary: no answers");
    std::map<std::string, std::size_t> freq;
    for (const auto& a : answers) ++freq[a];
    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (top_k > 0 && items.size() > top_k) items.resize(top_k);
    std::vector<std::string> list;
    list.reserve(items.size());
    for (auto& [a, n] : items) list.push_back(a);
    return from_list(std::move(list));
}

AnswerVocabulary AnswerVocabulary::from_list(std::vector<std::string> answers) {
    AnswerVocabulary v;
    for (auto& a : answers) {
        if (v.index_.count(a)) throw Error("AnswerVocabulary: duplicate answer '" + a + "'");
        v.index_[a] = v.answers_.size();
        v.answers_.push_back(std::move(a));
    }
    return v;
}

std::size_t AnswerVocabulary::index(const std::string& a) const {
    auto it = index_.find(a);
    if (it == index_.end()) throw Error("answer '" + a + "' not in answer vocabulary");
    return it->second;
}

const std::string& AnswerVocabulary::answer(std::size_t i) const {
    if (i >= answers_.size()) throw Error("answer index out of range");
    return answers_[i];
}

FusionParams::FusionParams(std::size_t state_dim, std::size_t num_answers)
    : fc_w("fusion.fc_w", state_dim, state_dim),
      fc_b("fusion.fc_b", state_dim, 1),
      cls_w("fusion.cls_w", num_answers, state_dim),
      cls_b("fusion.cls_b", num_answers, 1) {}

void FusionParams::init(double range, Rng& rng) {
    for (ParamGroup* g : groups())
        for (double& v : g->value.data) v = rng.uniform(-range, range);
}

std::vector<ParamGroup*> FusionParams::groups() {
    return {&fc_w, &fc_b, &cls_w, &cls_b};
}

Tape::Id fuse(Tape& tape, Tape::Id q_state, Tape::Id v_state) {
    if (tape.value(q_state).size() != tape.value(v_state).size())
        throw Error("fuse: state dims differ, " +
                    std::to_string(tape.value(q_state).size()) + " vs " +
                    std::to_string(tape.value(v_state).size()));
    return tape.mul(tape.tanh(q_state), tape.relu(v_state));
}

Tape::Id classify_logits(Tape& tape, Tape::Id fused, FusionParams& params) {
    const Tape::Id hidden = tape.tanh(tape.affine(params.fc_w, fused, params.fc_b));
    return tape.affine(params.cls_w, hidden, params.cls_b);
}

}  // namespace fda
