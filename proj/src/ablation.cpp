#include "fda/ablation.hpp"

#include <cstdio>
#include <sstream>

namespace fda {

namespace {

const char* row_label(Variant v) {
    switch (v) {
        case Variant::question_only: return "Question";
        case Variant::image_only: return "Image";
        case Variant::q_plus_i: return "Q+I";
        case Variant::lstm_q_i: return "LSTM Q+I";
        case Variant::fda: return "FDA";
    }
    return "?";
}

void accumulate(MetricsTable& sum, const MetricsTable& t, std::size_t n_seeds) {
    auto acc = [n_seeds](std::optional<double>& dst, const std::optional<double>& src) {
        if (!src) return;
        dst = dst.value_or(0.0) + *src / static_cast<double>(n_seeds);
    };
    acc(sum.all, t.all);
    acc(sum.yesno, t.yesno);
    acc(sum.number, t.number);
    acc(sum.other, t.other);
    sum.mean_loss += t.mean_loss / static_cast<double>(n_seeds);
    sum.count += t.count;
    sum.skipped += t.skipped;
}

std::string pct(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
    return buf;
}

}  // namespace

const AblationEntry& AblationReport::entry(Variant v) const {
    for (const auto& e : entries)
        if (e.variant == v) return e;
    throw Error("ablation report has no entry for " + variant_name(v));
}

std::string AblationReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "variant,mode,all,yesno,number,other,loss\n";
    auto emit = [&](const AblationEntry& e, const char* mode, const MetricsTable& t) {
        auto f = [](const std::optional<double>& v) {
            if (!v) return std::string();
            std::ostringstream s;
            s.precision(17);
            s << *v;
            return s.str();
        };
        out << variant_name(e.variant) << ',' << mode << ',' << f(t.all) << ',' << f(t.yesno)
            << ',' << f(t.number) << ',' << f(t.other) << ',' << t.mean_loss << '\n';
    };
    for (const auto& e : entries) {
        emit(e, "open", e.open);
        emit(e, "mc", e.mc);
    }
    return out.str();
}

std::string AblationReport::to_text() const {
    std::ostringstream out;
    auto table = [&](const char* title, auto pick) {
        out << title << "\n";
        out << "  Method     All     Y/N     Other   Num\n";
        for (const auto& e : entries) {
            const MetricsTable& t = pick(e);
            char buf[128];
            std::snprintf(buf, sizeof buf, "  %-10s %-7s %-7s %-7s %-7s\n", row_label(e.variant),
                          pct(t.all).c_str(), pct(t.yesno).c_str(), pct(t.other).c_str(),
                          pct(t.number).c_str());
            out << buf;
        }
    };
    table("open-ended", [](const AblationEntry& e) -> const MetricsTable& { return e.open; });
    out << "\n";
    table("multiple-choice", [](const AblationEntry& e) -> const MetricsTable& { return e.mc; });
    return out.str();
}

AblationReport run_ablation(
    const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
    const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
    const std::function<void(Variant, std::uint64_t, TrainResult&, const TrainConfig&)>&
        on_trained) {
    if (seeds.empty()) throw Error("run_ablation: no seeds");
    AblationReport report;
    report.seeds = seeds;
    for (Variant v : all_variants()) {
        AblationEntry entry;
        entry.variant = v;
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base;
            cfg.variant = v;
            cfg.seed = seed;
            TrainResult res = train(cfg, train_set, val_set);
            if (on_trained) on_trained(v, seed, res, cfg);
            MetricsTable open = evaluate(res.model, test_set, EvalMode::open, v);
            MetricsTable mc = evaluate(res.model, test_set, EvalMode::mc, v);
            accumulate(entry.open, open, seeds.size());
            accumulate(entry.mc, mc, seeds.size());
            entry.open_all_per_seed.push_back(open.all.value_or(0.0));
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace fda
