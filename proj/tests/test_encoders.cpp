#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fda/encoders.hpp"

using namespace fda;

namespace {

// Independent scalar LSTM step oracle for 1-d input/state.
struct Scalar1d {
    double h, c;
};
Scalar1d lstm_step_oracle_1d(double wi, double ui, double bi, double wf, double uf, double bf,
                             double wo, double uo, double bo, double wg, double ug, double bg,
                             double x, double h, double c) {
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double i = sig(wi * x + ui * h + bi);
    const double f = sig(wf * x + uf * h + bf);
    const double o = sig(wo * x + uo * h + bo);
    const double g = std::tanh(wg * x + ug * h + bg);
    const double c2 = f * c + i * g;
    return {o * std::tanh(c2), c2};
}

LSTMParams random_lstm(const std::string& name, std::size_t in, std::size_t state,
                       std::uint64_t seed) {
    LSTMParams p(name, in, state);
    Rng rng(seed);
    p.init(0.3, 1.0, rng);
    return p;
}

}  // namespace

TEST_CASE("zero state, zero input, zero parameters gives zero output") {
    LSTMParams p("z", 2, 3);  // params default to zero
    Tape t;
    auto st = lstm_zero_state(t, 3);
    st = lstm_step(t, p, st, t.input({0.0, 0.0}));
    CHECK(t.value(st.h) == Vec(3, 0.0));
    CHECK(t.value(st.c) == Vec(3, 0.0));
}

TEST_CASE("1-d step matches the scalar oracle") {
    LSTMParams p("s", 1, 1);
    const double vals[12] = {0.3, -0.2, 0.1, 0.5, 0.4, 1.0, -0.3, 0.2, 0.0, 0.7, -0.5, 0.2};
    for (int g = 0; g < 4; ++g) {
        p.W[g].value(0, 0) = vals[g * 3];
        p.U[g].value(0, 0) = vals[g * 3 + 1];
        p.b[g].value(0, 0) = vals[g * 3 + 2];
    }
    Tape t;
    LSTMStateIds st{t.input({0.2}), t.input({-0.4})};
    st = lstm_step(t, p, st, t.input({0.9}));
    const Scalar1d want = lstm_step_oracle_1d(vals[0], vals[1], vals[2], vals[3], vals[4],
                                              vals[5], vals[6], vals[7], vals[8], vals[9],
                                              vals[10], vals[11], 0.9, 0.2, -0.4);
    CHECK(t.value(st.h)[0] == doctest::Approx(want.h).epsilon(1e-14));
    CHECK(t.value(st.c)[0] == doctest::Approx(want.c).epsilon(1e-14));
}

TEST_CASE("saturated forget gate carries the cell state through") {
    LSTMParams p("f", 1, 1);
    p.b[1].value(0, 0) = 20.0;   // forget gate ~ 1
    p.b[0].value(0, 0) = -20.0;  // input gate ~ 0
    Tape t;
    LSTMStateIds st{t.input({0.0}), t.input({0.7})};
    st = lstm_step(t, p, st, t.input({0.5}));
    CHECK(t.value(st.c)[0] == doctest::Approx(0.7).epsilon(1e-8));
}

TEST_CASE("hidden state is bounded by 1 in magnitude") {
    LSTMParams p = random_lstm("b", 4, 6, 11);
    Rng rng(12);
    Tape t;
    auto st = lstm_zero_state(t, 6);
    for (int step = 0; step < 20; ++step) {
        Vec x(4);
        for (double& v : x) v = rng.uniform(-10.0, 10.0);
        st = lstm_step(t, p, st, t.input(x));
        for (double h : t.value(st.h)) CHECK(std::abs(h) < 1.0);
    }
}

TEST_CASE("encode_question folds steps exactly like a manual unroll") {
    LSTMParams p = random_lstm("q", 3, 5, 21);
    Rng rng(22);
    std::vector<Vec> xs(4, Vec(3));
    for (auto& x : xs)
        for (double& v : x) v = rng.uniform(-1.0, 1.0);

    Tape t;
    std::vector<Tape::Id> ids;
    for (const auto& x : xs) ids.push_back(t.input(x));
    const auto enc = encode_question(t, p, ids);

    Tape t2;
    auto st = lstm_zero_state(t2, 5);
    for (const auto& x : xs) st = lstm_step(t2, p, st, t2.input(x));
    CHECK(t.value(enc) == t2.value(st.h));

    // empty question encodes to the zero vector
    Tape t3;
    CHECK(t3.value(encode_question(t3, p, {})) == Vec(5, 0.0));
}

TEST_CASE("encode_visual consumes the feed sequence in order") {
    LSTMParams p = random_lstm("v", 4, 3, 31);
    SelectionTrace trace;
    trace.feed_sequence = {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}};
    Tape t;
    const auto enc = encode_visual(t, p, nullptr, nullptr, trace);

    Tape t2;
    auto st = lstm_zero_state(t2, 3);
    for (const auto& f : trace.feed_sequence) st = lstm_step(t2, p, st, t2.input(f));
    CHECK(t.value(enc) == t2.value(st.h));

    // order matters: reversed feed gives a different encoding
    SelectionTrace rev = trace;
    std::swap(rev.feed_sequence[0], rev.feed_sequence[1]);
    Tape t3;
    CHECK(t3.value(encode_visual(t3, p, nullptr, nullptr, rev)) != t.value(enc));
}

TEST_CASE("encode_visual projects mismatched feature dims, or rejects them") {
    LSTMParams p = random_lstm("vp", 3, 3, 41);
    SelectionTrace trace;
    trace.feed_sequence = {{1.0, 2.0, 3.0, 4.0, 5.0}};  // dim 5 != input 3
    Tape t;
    CHECK_THROWS_AS(encode_visual(t, p, nullptr, nullptr, trace), Error);

    ParamGroup proj_w("pw", 3, 5), proj_b("pb", 3, 1);
    Rng rng(42);
    for (double& v : proj_w.value.data) v = rng.uniform(-0.3, 0.3);
    Tape t2;
    const auto enc = encode_visual(t2, p, &proj_w, &proj_b, trace);
    CHECK(t2.value(enc).size() == 3);
    CHECK(all_finite(t2.value(enc)));
}

TEST_CASE("the encoder is position sensitive") {
    // swapping two distinct inputs must change the encoding for a generic
    // parameter draw
    LSTMParams p = random_lstm("ps", 2, 4, 51);
    const Vec a{1.0, 0.0}, b{0.0, 1.0};
    Tape t1, t2;
    const auto e1 = encode_question(t1, p, {t1.input(a), t1.input(b)});
    const auto e2 = encode_question(t2, p, {t2.input(b), t2.input(a)});
    CHECK(t1.value(e1) != t2.value(e2));
}

TEST_CASE("gradients through a two-step unroll pass finite differences") {
    LSTMParams p = random_lstm("g", 3, 4, 61);
    ParamGroup cls_w("cw", 2, 4), cls_b("cb", 2, 1);
    Rng rng(62);
    for (double& v : cls_w.value.data) v = rng.uniform(-0.5, 0.5);
    const std::vector<Vec> xs = {{0.2, -0.1, 0.4}, {-0.3, 0.5, 0.1}};

    auto run = [&](bool with_grad) {
        Tape t;
        std::vector<Tape::Id> ids;
        for (const auto& x : xs) ids.push_back(t.input(x));
        const auto h = encode_question(t, p, ids);
        const auto loss = t.cross_entropy_loss(t.affine(cls_w, h, cls_b), 1);
        if (with_grad) t.backward(loss);
        return t.scalar(loss);
    };
    std::vector<ParamGroup*> groups = p.groups();
    groups.push_back(&cls_w);
    groups.push_back(&cls_b);
    auto fb = [&] {
        for (auto* g : groups) g->zero_grad();
        return run(true);
    };
    auto f = [&] { return run(false); };
    CHECK(grad_check(fb, f, groups, 1e-5, 1e-4).passed());
}
