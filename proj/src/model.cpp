#include "fda/model.hpp"

#include <algorithm>

namespace fda {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::question_only: return "question_only";
        case Variant::image_only: return "image_only";
        case Variant::q_plus_i: return "q_plus_i";
        case Variant::lstm_q_i: return "lstm_q_i";
        case Variant::fda: return "fda";
    }
    throw Error("bad variant");
}

Variant variant_from_name(const std::string& s) {
    for (Variant v : all_variants())
        if (variant_name(v) == s) return v;
    throw Error("unknown variant '" + s + "'");
}

std::vector<Variant> all_variants() {
    return {Variant::question_only, Variant::image_only, Variant::q_plus_i,
            Variant::lstm_q_i, Variant::fda};
}

Model::Model(ModelDims d, Vocabulary voc, AnswerVocabulary ans, MatcherSpace m)
    : dims(d),
      vocab(std::move(voc)),
      answers(std::move(ans)),
      matcher(std::move(m)),
      embed("embed", vocab.size(), d.embed, false),
      qlstm("qlstm", d.embed, d.state),
      vlstm("vlstm", d.effective_visual_input(), d.state),
      qbow_w("qbow_w", d.state, d.embed),
      qbow_b("qbow_b", d.state, 1),
      vbow_w("vbow_w", d.state, d.visual),
      vbow_b("vbow_b", d.state, 1),
      fusion(d.state, answers.size()) {
    if (answers.size() == 0) throw Error("Model: empty answer vocabulary");
    if (d.visual_input != 0 && d.visual_input != d.visual) {
        has_vproj = true;
        vproj_w = ParamGroup("vproj_w", d.visual_input, d.visual);
        vproj_b = ParamGroup("vproj_b", d.visual_input, 1);
    }
}

void Model::init_params(std::uint64_t seed, double range, double forget_bias) {
    Rng rng(seed);
    for (double& v : embed.rows.value.data) v = rng.uniform(-range, range);
    qlstm.init(range, forget_bias, rng);
    vlstm.init(range, forget_bias, rng);
    if (has_vproj) {
        for (double& v : vproj_w.value.data) v = rng.uniform(-range, range);
        for (double& v : vproj_b.value.data) v = rng.uniform(-range, range);
    }
    for (ParamGroup* g : {&qbow_w, &qbow_b, &vbow_w, &vbow_b})
        for (double& v : g->value.data) v = rng.uniform(-range, range);
    fusion.init(range, rng);
}

std::vector<ParamGroup*> Model::all_groups() {
    std::vector<ParamGroup*> out;
    out.push_back(&embed.rows);
    for (ParamGroup* g : qlstm.groups()) out.push_back(g);
    for (ParamGroup* g : vlstm.groups()) out.push_back(g);
    if (has_vproj) {
        out.push_back(&vproj_w);
        out.push_back(&vproj_b);
    }
    out.push_back(&qbow_w);
    out.push_back(&qbow_b);
    out.push_back(&vbow_w);
    out.push_back(&vbow_b);
    for (ParamGroup* g : fusion.groups()) out.push_back(g);
    return out;
}

void Model::zero_grads() {
    for (ParamGroup* g : all_groups()) g->zero_grad();
}

ModelForward Model::forward(Tape& tape, const Scene& scene,
                            const std::vector<std::string>& tokens, Variant variant) {
    if (scene.global_feature.size() != dims.visual)
        throw Error("forward: scene visual dim " +
                    std::to_string(scene.global_feature.size()) + " != model visual dim " +
                    std::to_string(dims.visual));

    SelectionTrace trace;
    if (variant == Variant::fda)
        trace = build_visual_sequence(
            match_objects(tokens, scene, matcher, dims.threshold), scene);
    else
        trace = build_visual_sequence({}, scene);  // global feature only

    ParamGroup* pw = has_vproj ? &vproj_w : nullptr;
    ParamGroup* pb = has_vproj ? &vproj_b : nullptr;

    Tape::Id q_state = 0;
    Tape::Id v_state = 0;
    switch (variant) {
        case Variant::question_only:
            q_state = encode_question(tape, qlstm, embed_tokens(tape, vocab, embed, tokens));
            v_state = tape.ones(dims.state);
            break;
        case Variant::image_only:
            q_state = tape.ones(dims.state);
            v_state = encode_visual(tape, vlstm, pw, pb, trace);
            break;
        case Variant::q_plus_i: {
            auto embeds = embed_tokens(tape, vocab, embed, tokens);
            Tape::Id bow = embeds.empty() ? tape.input(Vec(dims.embed, 0.0))
                                          : tape.average(embeds);
            q_state = tape.affine(qbow_w, bow, qbow_b);
            v_state = tape.affine(vbow_w, tape.input(scene.global_feature), vbow_b);
            break;
        }
        case Variant::lstm_q_i:
        case Variant::fda:
            q_state = encode_question(tape, qlstm, embed_tokens(tape, vocab, embed, tokens));
            v_state = encode_visual(tape, vlstm, pw, pb, trace);
            break;
        default:
            throw Error("bad variant");
    }

    const Tape::Id fused = fuse(tape, q_state, v_state);
    return ModelForward{classify_logits(tape, fused, fusion), std::move(trace)};
}

Prediction Model::predict_open_ended(const Scene& scene,
                                     const std::vector<std::string>& tokens, Variant variant) {
    Tape tape;
    ModelForward fwd = forward(tape, scene, tokens, variant);
    const Vec probs = softmax(tape.value(fwd.logits));
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;  // ties keep the lowest index
    return Prediction{answers.answer(best), probs[best], std::move(fwd.trace)};
}

Prediction Model::predict_multiple_choice(const Scene& scene,
                                          const std::vector<std::string>& tokens,
                                          const std::vector<std::string>& choices,
                                          Variant variant) {
    if (choices.empty()) throw Error("predict_multiple_choice: empty choice list");
    Tape tape;
    ModelForward fwd = forward(tape, scene, tokens, variant);
    const Vec probs = softmax(tape.value(fwd.logits));

    // Restrict the open-ended distribution to the choices; choices outside
    // the answer vocabulary get probability 0.
    std::size_t best_choice = 0;
    double best_prob = -1.0;
    std::size_t best_index = probs.size();
    for (std::size_t ci = 0; ci < choices.size(); ++ci) {
        double p = 0.0;
        std::size_t idx = probs.size();
        if (answers.contains(choices[ci])) {
            idx = answers.index(choices[ci]);
            p = probs[idx];
        }
        if (p > best_prob || (p == best_prob && idx < best_index)) {
            best_prob = p;
            best_choice = ci;
            best_index = idx;
        }
    }
    return Prediction{choices[best_choice], std::max(best_prob, 0.0), std::move(fwd.trace)};
}

}  // namespace fda
