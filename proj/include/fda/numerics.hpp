#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fda/tensor.hpp"

namespace fda {

// ---------------------------------------------------------------------------
// Plain (tape-free) numeric operations.
// ---------------------------------------------------------------------------

Vec softmax(const Vec& z);  // max-subtracted, sums to 1
double cross_entropy(const Vec& p, std::size_t target);
double cosine_similarity(const Vec& u, const Vec& v);  // 0 when either norm is 0

double l2_norm(const Vec& v);
bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

// ---------------------------------------------------------------------------
// Reverse-mode tape.
//
// Every node holds a vector value and a same-shaped gradient slot. Parameter
// groups are not nodes; ops that touch them capture a pointer and write into
// the group's gradient accumulator during backward(). The caller owns all
// ParamGroups for the lifetime of the tape.
// ---------------------------------------------------------------------------

class Tape {
public:
    using Id = std::size_t;

    Id input(Vec v);                    // leaf; gradient is tracked but goes nowhere
    Id constant(Vec v) { return input(std::move(v)); }
    Id ones(std::size_t n) { return input(Vec(n, 1.0)); }

    const Vec& value(Id id) const { return nodes_[id].val; }
    const Vec& grad(Id id) const { return nodes_[id].grad; }

    // y = W x + b. b may be null for a bias-free product.
    Id affine(ParamGroup& W, Id x, ParamGroup* b);
    Id affine(ParamGroup& W, Id x, ParamGroup& b) { return affine(W, x, &b); }
    Id matvec(ParamGroup& W, Id x) { return affine(W, x, nullptr); }

    // Row lookup, the one-hot x matrix product in sparse form.
    Id embed(ParamGroup& table, std::size_t row);
    Id embed_frozen(const Matrix& table, std::size_t row);

    Id add(Id a, Id b);
    Id mul(Id a, Id b);  // elementwise
    Id tanh(Id a);
    Id relu(Id a);
    Id sigmoid(Id a);
    Id average(const std::vector<Id>& ids);
    Id softmax(Id z);

    // Fused softmax + negative log likelihood; scalar node. Backward adds
    // scale * (softmax(z) - onehot(target)) to the logits gradient.
    Id cross_entropy_loss(Id logits, std::size_t target, double scale = 1.0);

    double scalar(Id id) const;
    void backward(Id loss);

private:
    struct Node {
        Vec val;
        Vec grad;
        std::function<void(Tape&)> back;
    };
    Id push(Vec v, std::function<void(Tape&)> back);
    std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient verification.
// ---------------------------------------------------------------------------

struct GradCheckEntry {
    std::string group;
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    bool ok = false;
    std::string note;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double tolerance = 0.0;
    bool passed() const;
    double worst() const;
};

// forward_backward: zero grads, run forward + backward, leave analytic
// gradients in the groups and return the loss. forward: loss only, no
// side effects on gradients. Both must be deterministic.
//
// Above kGradCheckMaxCoords coordinates per group, a fixed-seed permutation
// picks the subsample so the suite stays fast.
inline constexpr std::size_t kGradCheckMaxCoords = 200;

GradCheckReport grad_check(const std::function<double()>& forward_backward,
                           const std::function<double()>& forward,
                           const std::vector<ParamGroup*>& params,
                           double step, double tolerance);

}  // namespace fda
