#pragma once

#include <array>
#include <memory>

#include "fda/attention.hpp"
#include "fda/numerics.hpp"
#include "fda/rng.hpp"

namespace fda {

// One-layer LSTM. Gate order everywhere: input, forget, output, candidate.
struct LSTMParams {
    std::size_t input_dim = 0;
    std::size_t state_dim = 0;
    ParamGroup W[4];  // state_dim x input_dim
    ParamGroup U[4];  // state_dim x state_dim
    ParamGroup b[4];  // state_dim x 1

    LSTMParams() = default;
    LSTMParams(const std::string& prefix, std::size_t input, std::size_t state);

    void init(double range, double forget_bias, Rng& rng);
    std::vector<ParamGroup*> groups();
};

struct LSTMStateIds {
    Tape::Id h = 0;
    Tape::Id c = 0;
};

LSTMStateIds lstm_zero_state(Tape& tape, std::size_t state_dim);

// i = sig(Wi x + Ui h + bi), f = sig(...), o = sig(...), g = tanh(...)
// c' = f*c + i*g, h' = o*tanh(c')
LSTMStateIds lstm_step(Tape& tape, LSTMParams& params, LSTMStateIds state, Tape::Id x);

// Fold over word embeddings from zero state; empty input encodes to zero.
Tape::Id encode_question(Tape& tape, LSTMParams& params,
                         const std::vector<Tape::Id>& embeddings);

// Fold over the attention feed sequence; a projection is applied first when
// the feature dim differs from the LSTM input dim.
Tape::Id encode_visual(Tape& tape, LSTMParams& params, ParamGroup* proj_w, ParamGroup* proj_b,
                       const SelectionTrace& trace);

}  // namespace fda
