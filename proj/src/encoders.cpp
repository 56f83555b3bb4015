#include "fda/encoders.hpp"

namespace fda {

namespace {
constexpr const char* kGateNames[4] = {"i", "f", "o", "g"};
}

LSTMParams::LSTMParams(const std::string& prefix, std::size_t input, std::size_t state)
    : input_dim(input), state_dim(state) {
    for (int k = 0; k < 4; ++k) {
        W[k] = ParamGroup(prefix + ".W" + kGateNames[k], state, input);
        U[k] = ParamGroup(prefix + ".U" + kGateNames[k], state, state);
        b[k] = ParamGroup(prefix + ".b" + kGateNames[k], state, 1);
    }
}

void LSTMParams::init(double range, double forget_bias, Rng& rng) {
    for (int k = 0; k < 4; ++k) {
        for (double& v : W[k].value.data) v = rng.uniform(-range, range);
        for (double& v : U[k].value.data) v = rng.uniform(-range, range);
        for (double& v : b[k].value.data) v = rng.uniform(-range, range);
    }
    for (double& v : b[1].value.data) v += forget_bias;  // forget gate open at start
}

std::vector<ParamGroup*> LSTMParams::groups() {
    std::vector<ParamGroup*> out;
    for (int k = 0; k < 4; ++k) {
        out.push_back(&W[k]);
        out.push_back(&U[k]);
        out.push_back(&b[k]);
    }
    return out;
}

LSTMStateIds lstm_zero_state(Tape& tape, std::size_t state_dim) {
    return {tape.input(Vec(state_dim, 0.0)), tape.input(Vec(state_dim, 0.0))};
}

LSTMStateIds lstm_step(Tape& tape, LSTMParams& p, LSTMStateIds state, Tape::Id x) {
    if (tape.value(x).size() != p.input_dim)
        throw Error("lstm_step: input dim " + std::to_string(tape.value(x).size()) +
                    " != " + std::to_string(p.input_dim));
    auto gate = [&](int k) {
        return tape.add(tape.affine(p.W[k], x, p.b[k]), tape.matvec(p.U[k], state.h));
    };
    const Tape::Id i = tape.sigmoid(gate(0));
    const Tape::Id f = tape.sigmoid(gate(1));
    const Tape::Id o = tape.sigmoid(gate(2));
    const Tape::Id g = tape.tanh(gate(3));
    const Tape::Id c = tape.add(tape.mul(f, state.c), tape.mul(i, g));
    const Tape::Id h = tape.mul(o, tape.tanh(c));
    return {h, c};
}

Tape::Id encode_question(Tape& tape, LSTMParams& params,
                         const std::vector<Tape::Id>& embeddings) {
    if (embeddings.empty()) return tape.input(Vec(params.state_dim, 0.0));
    LSTMStateIds s = lstm_zero_state(tape, params.state_dim);
    for (Tape::Id e : embeddings) s = lstm_step(tape, params, s, e);
    return s.h;
}

Tape::Id encode_visual(Tape& tape, LSTMParams& params, ParamGroup* proj_w, ParamGroup* proj_b,
                       const SelectionTrace& trace) {
    if (trace.feed_sequence.empty())
        throw Error("encode_visual: empty feed sequence");
    LSTMStateIds s = lstm_zero_state(tape, params.state_dim);
    for (const Vec& f : trace.feed_sequence) {
        Tape::Id x = tape.input(f);
        if (f.size() != params.input_dim) {
            if (!proj_w)
                throw Error("encode_visual: feature dim " + std::to_string(f.size()) +
                            " != LSTM input dim " + std::to_string(params.input_dim) +
                            " and no projection is configured");
            x = tape.affine(*proj_w, x, proj_b);
        }
        s = lstm_step(tape, params, s, x);
    }
    return s.h;
}

}  // namespace fda
