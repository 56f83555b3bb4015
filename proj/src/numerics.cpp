#include "fda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fda/kernels.hpp"
#include "fda/rng.hpp"

namespace fda {

Vec softmax(const Vec& z) {
    if (z.empty()) throw Error("softmax: empty input");
    const double m = *std::max_element(z.begin(), z.end());
    Vec out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

double cross_entropy(const Vec& p, std::size_t target) {
    if (target >= p.size())
        throw Error("cross_entropy: target " + std::to_string(target) +
                    " out of range for distribution of size " + std::to_string(p.size()));
    return -std::log(p[target]);
}

double l2_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double cosine_similarity(const Vec& u, const Vec& v) {
    if (u.size() != v.size())
        throw Error("cosine_similarity: dimension mismatch " +
                    std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
    const double nu = l2_norm(u), nv = l2_norm(v);
    if (nu == 0.0 || nv == 0.0) return 0.0;  // zero norm means no semantic content
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) { return all_finite(m.data); }

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tape::Id Tape::push(Vec v, std::function<void(Tape&)> back) {
    Node n;
    n.val = std::move(v);
    n.grad.assign(n.val.size(), 0.0);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

Tape::Id Tape::input(Vec v) { return push(std::move(v), nullptr); }

Tape::Id Tape::affine(ParamGroup& W, Id x, ParamGroup* b) {
    const Vec& xv = nodes_[x].val;
    if (W.value.cols != xv.size())
        throw Error("affine: " + W.name + " is " + shape_str(W.value.rows, W.value.cols) +
                    " but input has dim " + std::to_string(xv.size()));
    if (b && b->value.rows != W.value.rows)
        throw Error("affine: bias " + b->name + " is " +
                    shape_str(b->value.rows, b->value.cols) + " but " + W.name + " has " +
                    std::to_string(W.value.rows) + " rows");
    Vec y;
    kernels::matvec(W.value, xv, y);
    if (b)
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b->value(i, 0);
    const Id out = push(std::move(y), nullptr);
    ParamGroup* Wp = &W;
    nodes_[out].back = [Wp, b, x, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& xv2 = t.nodes_[x].val;
        if (Wp->trainable) kernels::outer_add(Wp->grad, dy, xv2);
        kernels::matvec_t_add(Wp->value, dy, t.nodes_[x].grad);
        if (b && b->trainable)
            for (std::size_t i = 0; i < dy.size(); ++i) b->grad(i, 0) += dy[i];
    };
    return out;
}

Tape::Id Tape::embed(ParamGroup& table, std::size_t row) {
    if (row >= table.value.rows)
        throw Error("embed: row " + std::to_string(row) + " out of range for " + table.name);
    const Id out = push(table.value.row(row), nullptr);
    ParamGroup* tp = &table;
    nodes_[out].back = [tp, row, out](Tape& t) {
        if (!tp->trainable) return;
        const Vec& dy = t.nodes_[out].grad;
        double* gr = tp->grad.row_ptr(row);
        for (std::size_t j = 0; j < dy.size(); ++j) gr[j] += dy[j];
    };
    return out;
}

Tape::Id Tape::embed_frozen(const Matrix& table, std::size_t row) {
    if (row >= table.rows)
        throw Error("embed_frozen: row " + std::to_string(row) + " out of range");
    return input(table.row(row));
}

Tape::Id Tape::add(Id a, Id b) {
    const Vec& av = nodes_[a].val;
    const Vec& bv = nodes_[b].val;
    if (av.size() != bv.size())
        throw Error("add: dimension mismatch " + std::to_string(av.size()) + " vs " +
                    std::to_string(bv.size()));
    Vec y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
    const Id out = push(std::move(y), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        for (std::size_t i = 0; i < dy.size(); ++i) {
            t.nodes_[a].grad[i] += dy[i];
            t.nodes_[b].grad[i] += dy[i];
        }
    };
    return out;
}

Tape::Id Tape::mul(Id a, Id b) {
    const Vec& av = nodes_[a].val;
    const Vec& bv = nodes_[b].val;
    if (av.size() != bv.size())
        throw Error("mul: dimension mismatch " + std::to_string(av.size()) + " vs " +
                    std::to_string(bv.size()));
    Vec y(av.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
    const Id out = push(std::move(y), nullptr);
    nodes_[out].back = [a, b, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& av2 = t.nodes_[a].val;
        const Vec& bv2 = t.nodes_[b].val;
        for (std::size_t i = 0; i < dy.size(); ++i) {
            t.nodes_[a].grad[i] += dy[i] * bv2[i];
            t.nodes_[b].grad[i] += dy[i] * av2[i];
        }
    };
    return out;
}

Tape::Id Tape::tanh(Id a) {
    Vec y(nodes_[a].val.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(nodes_[a].val[i]);
    const Id out = push(std::move(y), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& yv = t.nodes_[out].val;
        for (std::size_t i = 0; i < dy.size(); ++i)
            t.nodes_[a].grad[i] += dy[i] * (1.0 - yv[i] * yv[i]);
    };
    return out;
}

Tape::Id Tape::relu(Id a) {
    Vec y(nodes_[a].val.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(0.0, nodes_[a].val[i]);
    const Id out = push(std::move(y), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& xv = t.nodes_[a].val;
        // subgradient at exactly 0 is 0
        for (std::size_t i = 0; i < dy.size(); ++i)
            if (xv[i] > 0.0) t.nodes_[a].grad[i] += dy[i];
    };
    return out;
}

Tape::Id Tape::sigmoid(Id a) {
    Vec y(nodes_[a].val.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-nodes_[a].val[i]));
    const Id out = push(std::move(y), nullptr);
    nodes_[out].back = [a, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& yv = t.nodes_[out].val;
        for (std::size_t i = 0; i < dy.size(); ++i)
            t.nodes_[a].grad[i] += dy[i] * yv[i] * (1.0 - yv[i]);
    };
    return out;
}

Tape::Id Tape::average(const std::vector<Id>& ids) {
    if (ids.empty()) throw Error("average: empty id list");
    const std::size_t n = nodes_[ids[0]].val.size();
    Vec y(n, 0.0);
    for (Id id : ids) {
        const Vec& v = nodes_[id].val;
        if (v.size() != n) throw Error("average: dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) y[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (double& v : y) v *= inv;
    const Id out = push(std::move(y), nullptr);
    std::vector<Id> srcs = ids;
    nodes_[out].back = [srcs, inv, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        for (Id id : srcs)
            for (std::size_t i = 0; i < dy.size(); ++i)
                t.nodes_[id].grad[i] += dy[i] * inv;
    };
    return out;
}

Tape::Id Tape::softmax(Id z) {
    Vec p = fda::softmax(nodes_[z].val);
    const Id out = push(std::move(p), nullptr);
    nodes_[out].back = [z, out](Tape& t) {
        const Vec& dy = t.nodes_[out].grad;
        const Vec& pv = t.nodes_[out].val;
        double dot = 0.0;
        for (std::size_t i = 0; i < dy.size(); ++i) dot += dy[i] * pv[i];
        for (std::size_t i = 0; i < dy.size(); ++i)
            t.nodes_[z].grad[i] += pv[i] * (dy[i] - dot);
    };
    return out;
}

Tape::Id Tape::cross_entropy_loss(Id logits, std::size_t target, double scale) {
    const Vec& z = nodes_[logits].val;
    if (target >= z.size())
        throw Error("cross_entropy_loss: target " + std::to_string(target) +
                    " out of range for " + std::to_string(z.size()) + " logits");
    Vec p = fda::softmax(z);
    const double loss = -std::log(p[target]) * scale;
    const Id out = push(Vec{loss}, nullptr);
    nodes_[out].back = [logits, target, scale, p = std::move(p), out](Tape& t) {
        const double d = t.nodes_[out].grad[0] * scale;
        Vec& gz = t.nodes_[logits].grad;
        for (std::size_t i = 0; i < p.size(); ++i) gz[i] += d * p[i];
        gz[target] -= d;
    };
    return out;
}

double Tape::scalar(Id id) const {
    if (nodes_[id].val.size() != 1) throw Error("scalar: node is not scalar");
    return nodes_[id].val[0];
}

void Tape::backward(Id loss) {
    Vec& g = nodes_[loss].grad;
    std::fill(g.begin(), g.end(), 1.0);
    for (std::size_t i = loss + 1; i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this);
    }
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

bool GradCheckReport::passed() const {
    if (entries.empty()) return false;
    for (const auto& e : entries)
        if (!e.ok) return false;
    return true;
}

double GradCheckReport::worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.max_rel_err);
    return w;
}

GradCheckReport grad_check(const std::function<double()>& forward_backward,
                           const std::function<double()>& forward,
                           const std::vector<ParamGroup*>& params,
                           double step, double tolerance) {
    if (step <= 0.0) throw Error("grad_check: step must be positive");
    GradCheckReport report;
    report.tolerance = tolerance;

    const double base = forward_backward();
    if (!std::isfinite(base)) {
        for (ParamGroup* g : params)
            report.entries.push_back({g->name, 0.0, 0, false, "non-finite base loss"});
        return report;
    }

    constexpr double kGuard = 1e-12;
    // Central differences cannot resolve derivatives below roughly
    // eps * |loss| / step. Flooring the denominator so that noise at that
    // level stays an order of magnitude under the tolerance keeps
    // coordinates with true gradients beneath FD resolution from failing
    // spuriously.
    const double fd_noise = std::numeric_limits<double>::epsilon() *
                            std::max(1.0, std::abs(base)) / step;
    const double noise_floor = std::max(kGuard, 10.0 * fd_noise / tolerance);
    for (std::size_t gi = 0; gi < params.size(); ++gi) {
        ParamGroup* g = params[gi];
        GradCheckEntry entry;
        entry.group = g->name;

        std::vector<std::size_t> coords(g->value.size());
        for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
        if (coords.size() > kGradCheckMaxCoords) {
            Rng rng(0x9e3779b9u + gi);
            rng.shuffle(coords);
            coords.resize(kGradCheckMaxCoords);
        }

        bool finite_ok = true;
        for (std::size_t c : coords) {
            const double saved = g->value.data[c];
            g->value.data[c] = saved + step;
            const double up = forward();
            g->value.data[c] = saved - step;
            const double down = forward();
            g->value.data[c] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                finite_ok = false;
                entry.note = "non-finite loss during perturbation";
                break;
            }
            const double numeric = (up - down) / (2.0 * step);
            const double analytic = g->grad.data[c];
            const double denom =
                std::max({std::abs(analytic), std::abs(numeric), noise_floor});
            const double rel = std::abs(analytic - numeric) / denom;
            // both effectively zero: agreement
            if (std::abs(analytic) < kGuard && std::abs(numeric) < step * step) continue;
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
            ++entry.checked;
        }
        entry.ok = finite_ok && entry.max_rel_err < tolerance;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace fda
