#include "fda/training.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fda {

using nlohmann::json;

std::string eval_mode_name(EvalMode m) { return m == EvalMode::open ? "open" : "mc"; }

std::string TrainConfig::to_json() const {
    json j = {{"seed", seed},
              {"epochs", epochs},
              {"batch_size", batch_size},
              {"learning_rate", learning_rate},
              {"optimizer", optimizer},
              {"clip_norm", clip_norm},
              {"weight_decay", weight_decay},
              {"embed_dim", dims.embed},
              {"state_dim", dims.state},
              {"visual_dim", dims.visual},
              {"visual_input_dim", dims.visual_input},
              {"threshold", dims.threshold},
              {"variant", variant_name(variant)}};
    return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid train config JSON: ") + e.what());
    }
    TrainConfig c;
    c.seed = j.value("seed", c.seed);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.optimizer = j.value("optimizer", c.optimizer);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.dims.embed = j.value("embed_dim", c.dims.embed);
    c.dims.state = j.value("state_dim", c.dims.state);
    c.dims.visual = j.value("visual_dim", c.dims.visual);
    c.dims.visual_input = j.value("visual_input_dim", c.dims.visual_input);
    c.dims.threshold = j.value("threshold", c.dims.threshold);
    if (j.contains("variant")) c.variant = variant_from_name(j.at("variant"));
    if (c.batch_size == 0) throw Error("train config: batch_size must be positive");
    if (c.learning_rate < 0.0) throw Error("train config: negative learning rate");
    if (c.optimizer != "adam") throw Error("train config: unknown optimizer " + c.optimizer);
    return c;
}

std::string MetricsTable::csv_header() {
    return "epoch,split,mode,variant,all,yesno,number,other,loss";
}

namespace {
std::string opt_str(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream out;
    out.precision(17);
    out << *v;
    return out.str();
}
}  // namespace

std::string MetricsTable::csv_row(std::size_t epoch, const std::string& split,
                                  const std::string& mode, const std::string& variant) const {
    std::ostringstream out;
    out.precision(17);
    out << epoch << ',' << split << ',' << mode << ',' << variant << ',' << opt_str(all)
        << ',' << opt_str(yesno) << ',' << opt_str(number) << ',' << opt_str(other) << ','
        << mean_loss;
    return out.str();
}

double batch_loss(Model& model, const Dataset& ds, const std::vector<std::size_t>& indices,
                  Variant variant, bool with_grad, std::size_t* skipped_out) {
    if (indices.empty()) throw Error("batch_loss: empty batch");
    double total = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t idx : indices) {
        const QASample& qa = ds.samples.at(idx);
        if (!model.answers.contains(qa.answer)) {
            ++skipped;
            continue;
        }
        ++used;
    }
    if (skipped_out) *skipped_out = skipped;
    if (used == 0) return 0.0;
    const double scale = 1.0 / static_cast<double>(used);

    for (std::size_t idx : indices) {
        const QASample& qa = ds.samples.at(idx);
        if (!model.answers.contains(qa.answer)) continue;
        const Scene& scene = ds.scene_by_id(qa.scene_id);
        Tape tape;
        ModelForward fwd = model.forward(tape, scene, qa.tokens, variant);
        const Tape::Id loss =
            tape.cross_entropy_loss(fwd.logits, model.answers.index(qa.answer), scale);
        total += tape.scalar(loss);
        if (with_grad) tape.backward(loss);
    }
    return total;
}

AdamOptimizer::AdamOptimizer(std::vector<ParamGroup*> params, double lr, double clip_norm,
                             double weight_decay, double beta1, double beta2, double eps)
    : params_(std::move(params)),
      lr_(lr),
      clip_(clip_norm),
      wd_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
    for (ParamGroup* g : params_) {
        m_.emplace_back(g->value.rows, g->value.cols);
        v_.emplace_back(g->value.rows, g->value.cols);
    }
}

double AdamOptimizer::step() {
    double sq = 0.0;
    for (ParamGroup* g : params_) {
        if (!g->trainable) continue;
        for (double x : g->grad.data) sq += x * x;
    }
    const double norm = std::sqrt(sq);
    const double rescale = (clip_ > 0.0 && norm > clip_) ? clip_ / norm : 1.0;

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t gi = 0; gi < params_.size(); ++gi) {
        ParamGroup* g = params_[gi];
        if (!g->trainable) continue;
        for (std::size_t i = 0; i < g->value.size(); ++i) {
            double grad = g->grad.data[i] * rescale;
            if (wd_ > 0.0) grad += wd_ * g->value.data[i];
            double& m = m_[gi].data[i];
            double& v = v_[gi].data[i];
            m = beta1_ * m + (1.0 - beta1_) * grad;
            v = beta2_ * v + (1.0 - beta2_) * grad * grad;
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            g->value.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
    return norm;
}

MatcherSpace build_matcher_from_data(const Dataset& ds) {
    std::set<std::string> label_set;
    for (const auto& s : ds.scenes)
        for (const auto& o : s.objects) label_set.insert(o.label);
    std::vector<std::string> labels(label_set.begin(), label_set.end());

    std::set<std::string> token_set;
    for (const auto& q : ds.samples)
        for (const auto& t : q.tokens) token_set.insert(t);

    std::vector<std::pair<std::string, std::string>> synonyms;
    std::vector<std::string> other;
    for (const auto& t : token_set) {
        if (label_set.count(t)) continue;
        if (t.size() > 1 && t.back() == 's' && label_set.count(t.substr(0, t.size() - 1)))
            synonyms.emplace_back(t, t.substr(0, t.size() - 1));
        else
            other.push_back(t);
    }
    return build_matcher_space(labels, other, synonyms);
}

GradCheckReport model_grad_check(Model& model, const Dataset& ds,
                                 const std::vector<std::size_t>& indices, Variant variant,
                                 double step, double tolerance) {
    auto forward_backward = [&]() {
        model.zero_grads();
        return batch_loss(model, ds, indices, variant, true);
    };
    auto forward = [&]() { return batch_loss(model, ds, indices, variant, false); };
    std::vector<ParamGroup*> trainable;
    for (ParamGroup* g : model.all_groups())
        if (g->trainable) trainable.push_back(g);
    return grad_check(forward_backward, forward, trainable, step, tolerance);
}

Model build_model_from_data(const TrainConfig& cfg, const Dataset& ds,
                            std::size_t top_k_answers) {
    if (ds.samples.empty()) throw Error("build_model_from_data: empty dataset");
    std::vector<std::vector<std::string>> corpus;
    std::vector<std::string> answers;
    for (const auto& q : ds.samples) {
        corpus.push_back(q.tokens);
        answers.push_back(q.answer);
    }
    TrainConfig c = cfg;
    c.dims.visual = ds.visual_dim;
    Model model(c.dims, Vocabulary::build(corpus),
                AnswerVocabulary::build(answers, top_k_answers), build_matcher_from_data(ds));
    model.init_params(c.seed);
    return model;
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& val_set) {
    if (train_set.samples.empty()) throw Error("train: empty training set");
    if (train_set.visual_dim != val_set.visual_dim)
        throw Error("train: train/val visual dims differ");

    TrainConfig cfg = config;
    cfg.dims.visual = train_set.visual_dim;
    Model model = build_model_from_data(cfg, train_set);

    TrainResult result;
    AdamOptimizer opt(model.all_groups(), cfg.learning_rate, cfg.clip_norm, cfg.weight_decay);

    auto snapshot = [&]() {
        Model copy(cfg.dims, model.vocab, model.answers, model.matcher);
        auto src = model.all_groups();
        auto dst = copy.all_groups();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
        return copy;
    };

    result.model = snapshot();
    double best_acc = -1.0;

    std::vector<std::size_t> order(train_set.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng shuffle_rng(cfg.seed * 0x100000001ull + epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            model.zero_grads();
            const double loss = batch_loss(model, train_set, batch, cfg.variant, true);
            if (!std::isfinite(loss)) {
                result.diverged = true;
                result.diagnostic = "non-finite loss in epoch " + std::to_string(epoch);
                return result;
            }
            opt.step();
            epoch_loss += loss;
            ++n_batches;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = n_batches ? epoch_loss / static_cast<double>(n_batches) : 0.0;
        stats.val = evaluate(model, val_set, EvalMode::open, cfg.variant);
        result.history.push_back(stats);

        const double acc = stats.val.all.value_or(0.0);
        if (acc > best_acc) {
            best_acc = acc;
            result.model = snapshot();
            result.best_epoch = epoch;
        }
    }
    return result;
}

MetricsTable evaluate(Model& model, const Dataset& ds, EvalMode mode, Variant variant) {
    if (mode == EvalMode::mc)
        for (const auto& q : ds.samples)
            if (!q.choices)
                throw Error("evaluate: multiple-choice mode on a dataset without choices "
                            "(qa " + std::to_string(q.id) + ")");

    // Stable order by sample position (samples are sorted by qa id on disk);
    // the parallel loop writes disjoint slots.
    const std::int64_t n = static_cast<std::int64_t>(ds.samples.size());
    std::vector<int> correct(ds.samples.size(), 0);
    std::vector<int> skipped(ds.samples.size(), 0);
    std::vector<double> losses(ds.samples.size(), 0.0);

#pragma omp parallel for schedule(static)
    for (std::int64_t ii = 0; ii < n; ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const QASample& qa = ds.samples[i];
        if (!model.answers.contains(qa.answer)) {
            skipped[i] = 1;
            continue;
        }
        const Scene& scene = ds.scene_by_id(qa.scene_id);
        Tape tape;
        ModelForward fwd = model.forward(tape, scene, qa.tokens, variant);
        const Vec probs = softmax(tape.value(fwd.logits));
        losses[i] = cross_entropy(probs, model.answers.index(qa.answer));

        std::string predicted;
        if (mode == EvalMode::open) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < probs.size(); ++k)
                if (probs[k] > probs[best]) best = k;
            predicted = model.answers.answer(best);
        } else {
            const auto& choices = *qa.choices;
            std::size_t best_choice = 0;
            double best_prob = -1.0;
            std::size_t best_index = probs.size();
            for (std::size_t ci = 0; ci < choices.size(); ++ci) {
                double p = 0.0;
                std::size_t idx = probs.size();
                if (model.answers.contains(choices[ci])) {
                    idx = model.answers.index(choices[ci]);
                    p = probs[idx];
                }
                if (p > best_prob || (p == best_prob && idx < best_index)) {
                    best_prob = p;
                    best_choice = ci;
                    best_index = idx;
                }
            }
            predicted = choices[best_choice];
        }
        correct[i] = predicted == qa.answer ? 1 : 0;
    }

    struct Bucket {
        std::size_t n = 0, ok = 0;
    };
    Bucket all, yn, num, oth;
    MetricsTable t;
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        if (skipped[i]) {
            ++t.skipped;
            continue;
        }
        ++all.n;
        all.ok += static_cast<std::size_t>(correct[i]);
        loss_sum += losses[i];
        Bucket* b = nullptr;
        switch (ds.samples[i].qtype) {
            case QType::yesno: b = &yn; break;
            case QType::number: b = &num; break;
            case QType::color:
            case QType::other: b = &oth; break;
        }
        ++b->n;
        b->ok += static_cast<std::size_t>(correct[i]);
    }
    auto acc = [](const Bucket& b) -> std::optional<double> {
        if (b.n == 0) return std::nullopt;
        return static_cast<double>(b.ok) / static_cast<double>(b.n);
    };
    t.all = acc(all);
    t.yesno = acc(yn);
    t.number = acc(num);
    t.other = acc(oth);
    t.count = all.n;
    t.mean_loss = all.n ? loss_sum / static_cast<double>(all.n) : 0.0;
    return t;
}

}  // namespace fda
