// Command-line harness: dataset generation, training, evaluation,
// prediction, trace inspection, ablation tables, gradient checking and
// SVG plots.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fda/ablation.hpp"
#include "fda/checkpoint.hpp"
#include "fda/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fda::Error("cannot open file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw fda::Error("cannot write file: " + path);
    out << content;
}

// --out defaults to $FDA_OUT_DIR, then the current directory.
std::string default_out_dir() {
    if (const char* env = std::getenv("FDA_OUT_DIR")) return env;
    return ".";
}

void print_metrics(const fda::MetricsTable& t, const std::string& label) {
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%.2f", *v * 100.0);
        return std::string(buf);
    };
    std::cout << label << ": All " << pct(t.all) << "  Y/N " << pct(t.yesno) << "  Other "
              << pct(t.other) << "  Num " << pct(t.number) << "  loss " << t.mean_loss
              << "  (n=" << t.count << ", skipped=" << t.skipped << ")\n";
}

json trace_json(const fda::SelectionTrace& trace) {
    json arr = json::array();
    for (const auto& m : trace.matches)
        arr.push_back({{"word_position", m.word_position},
                       {"word", m.word},
                       {"object_index", m.object_index},
                       {"label", m.label},
                       {"similarity", m.similarity}});
    return arr;
}

fda::SceneConfig toy_scene_config() {
    fda::SceneConfig cfg;
    cfg.min_objects = 1;
    cfg.max_objects = 4;
    cfg.nouns = {"ball", "cube"};
    cfg.colors = {"red", "blue"};
    cfg.sizes = {"small", "large"};
    cfg.backgrounds = {"indoor"};
    cfg.visual_dim = 16;
    cfg.noise = 0.1;
    cfg.num_choices = 12;
    return cfg;
}

int run_grad_check() {
    const fda::SceneConfig cfg = toy_scene_config();
    const fda::Dataset ds = fda::generate_dataset(11, cfg, 24, false);
    fda::TrainConfig tc;
    tc.seed = 11;
    tc.dims.embed = 8;
    tc.dims.state = 16;
    tc.dims.visual = 16;

    bool ok = true;
    for (fda::Variant v : fda::all_variants()) {
        fda::Model model = fda::build_model_from_data(tc, ds, 12);
        std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5, 6, 7};
        const fda::GradCheckReport report = fda::model_grad_check(model, ds, batch, v);
        for (const auto& e : report.entries) {
            if (e.checked == 0 && e.ok) continue;  // group unused by this variant
            std::cout << fda::variant_name(v) << " " << e.group << " max_rel_err "
                      << e.max_rel_err << (e.ok ? " ok" : " FAIL") << "\n";
        }
        if (!report.passed()) ok = false;
        std::cout << fda::variant_name(v) << ": worst " << report.worst()
                  << (report.passed() ? " PASS" : " FAIL") << "\n";
    }
    return ok ? 0 : 1;
}

struct MetricsRow {
    std::size_t epoch;
    std::string split, mode, variant;
    std::optional<double> all;
    double loss;
};

std::vector<MetricsRow> parse_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fda::Error("cannot open metrics CSV: " + path);
    std::vector<MetricsRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() < 9) throw fda::Error(path + ": malformed metrics row: " + line);
        MetricsRow r;
        r.epoch = std::stoul(f[0]);
        r.split = f[1];
        r.mode = f[2];
        r.variant = f[3];
        if (!f[4].empty()) r.all = std::stod(f[4]);
        r.loss = std::stod(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Focused dynamic attention VQA on a synthetic scene benchmark"};
    app.require_subcommand(1);

    try {
        // ---------------- gen-data ----------------
        auto* gen = app.add_subcommand("gen-data", "generate SceneWorld dataset splits");
        std::uint64_t gen_seed = 7;
        std::size_t n_train = 2000, n_val = 500, n_test = 500;
        std::string gen_config, gen_out = default_out_dir();
        bool no_choices = false;
        gen->add_option("--seed", gen_seed);
        gen->add_option("--train", n_train);
        gen->add_option("--val", n_val);
        gen->add_option("--test", n_test);
        gen->add_option("--config", gen_config, "scene config JSON file");
        gen->add_option("--out", gen_out, "output directory");
        gen->add_flag("--no-choices", no_choices, "omit multiple-choice lists");
        gen->callback([&] {
            fda::SceneConfig cfg;
            if (!gen_config.empty()) cfg = fda::SceneConfig::from_json(read_file(gen_config));
            cfg.validate();
            fs::create_directories(gen_out);
            const struct { const char* name; std::uint64_t offset; std::size_t n; } splits[] = {
                {"train", 0, n_train}, {"val", 1, n_val}, {"test", 2, n_test}};
            for (const auto& s : splits) {
                const fda::Dataset ds =
                    fda::generate_dataset(gen_seed * 3 + s.offset, cfg, s.n, !no_choices);
                fda::write_dataset(gen_out + "/" + s.name + ".jsonl", ds);
            }
            const std::string cfg_json = cfg.to_json();
            json manifest = {{"seed", gen_seed},
                             {"train", n_train},
                             {"val", n_val},
                             {"test", n_test},
                             {"config_hash", fnv1a(cfg_json)},
                             {"config", json::parse(cfg_json)}};
            write_file(gen_out + "/manifest.json", manifest.dump(2) + "\n");
            std::cout << "wrote " << gen_out << "/{train,val,test}.jsonl\n";
        });

        // ---------------- train ----------------
        auto* tr = app.add_subcommand("train", "train one variant and save a checkpoint");
        std::string tr_data, tr_out = default_out_dir() + "/model.ckpt", tr_metrics;
        std::string tr_variant = "fda", tr_config;
        fda::TrainConfig tc;
        tr->add_option("--data", tr_data, "dataset directory (train.jsonl, val.jsonl)")
            ->required();
        tr->add_option("--variant", tr_variant);
        tr->add_option("--seed", tc.seed);
        tr->add_option("--out", tr_out, "checkpoint path");
        tr->add_option("--metrics", tr_metrics, "metrics history CSV path");
        tr->add_option("--config", tr_config, "train config JSON file");
        tr->add_option("--epochs", tc.epochs);
        tr->add_option("--batch", tc.batch_size);
        tr->add_option("--lr", tc.learning_rate);
        tr->add_option("--clip", tc.clip_norm);
        tr->add_option("--embed-dim", tc.dims.embed);
        tr->add_option("--state-dim", tc.dims.state);
        tr->add_option("--threshold", tc.dims.threshold);
        tr->callback([&] {
            fda::TrainConfig cfg = tc;
            if (!tr_config.empty()) cfg = fda::TrainConfig::from_json(read_file(tr_config));
            cfg.variant = fda::variant_from_name(tr_variant);
            const fda::Dataset train_set = fda::read_dataset(tr_data + "/train.jsonl");
            const fda::Dataset val_set = fda::read_dataset(tr_data + "/val.jsonl");
            fda::TrainResult res = fda::train(cfg, train_set, val_set);
            if (res.diverged) throw fda::Error("training diverged: " + res.diagnostic);
            cfg.dims.visual = train_set.visual_dim;
            fda::save_checkpoint(tr_out, res.model, cfg, res.best_epoch,
                                 res.history.empty()
                                     ? 0.0
                                     : res.history.back().val.all.value_or(0.0));
            if (!tr_metrics.empty()) {
                std::ostringstream csv;
                csv << fda::MetricsTable::csv_header() << "\n";
                for (const auto& h : res.history) {
                    fda::MetricsTable t;
                    t.mean_loss = h.train_loss;
                    csv << t.csv_row(h.epoch, "train", "open", fda::variant_name(cfg.variant))
                        << "\n";
                    csv << h.val.csv_row(h.epoch, "val", "open",
                                         fda::variant_name(cfg.variant))
                        << "\n";
                }
                write_file(tr_metrics, csv.str());
            }
            if (!res.history.empty())
                print_metrics(res.history.back().val, "final val (open)");
            std::cout << "checkpoint written to " << tr_out << " (best epoch "
                      << res.best_epoch << ")\n";
        });

        // ---------------- eval ----------------
        auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a dataset file");
        std::string ev_ckpt, ev_data, ev_mode = "open", ev_csv;
        ev->add_option("--ckpt", ev_ckpt)->required();
        ev->add_option("--data", ev_data, "dataset JSONL file")->required();
        ev->add_option("--mode", ev_mode)->check(CLI::IsMember({"open", "mc"}));
        ev->add_option("--csv", ev_csv, "write the metrics row to this CSV");
        ev->callback([&] {
            fda::Checkpoint ck = fda::load_checkpoint(ev_ckpt);
            const fda::Dataset ds = fda::read_dataset(ev_data);
            const fda::EvalMode mode = ev_mode == "open" ? fda::EvalMode::open
                                                         : fda::EvalMode::mc;
            const fda::MetricsTable t = fda::evaluate(ck.model, ds, mode, ck.config.variant);
            print_metrics(t, ev_mode);
            if (!ev_csv.empty())
                write_file(ev_csv, fda::MetricsTable::csv_header() + "\n" +
                                       t.csv_row(ck.epoch, "test", ev_mode,
                                                 fda::variant_name(ck.config.variant)) +
                                       "\n");
        });

        // ---------------- predict ----------------
        auto* pr = app.add_subcommand("predict", "emit prediction JSONL with traces");
        std::string pr_ckpt, pr_data, pr_out = default_out_dir() + "/predictions.jsonl";
        std::string pr_mode = "open";
        pr->add_option("--ckpt", pr_ckpt)->required();
        pr->add_option("--data", pr_data)->required();
        pr->add_option("--out", pr_out);
        pr->add_option("--mode", pr_mode)->check(CLI::IsMember({"open", "mc"}));
        pr->callback([&] {
            fda::Checkpoint ck = fda::load_checkpoint(pr_ckpt);
            const fda::Dataset ds = fda::read_dataset(pr_data);
            std::ofstream out(pr_out);
            if (!out) throw fda::Error("cannot write " + pr_out);
            for (const auto& qa : ds.samples) {
                const fda::Scene& scene = ds.scene_by_id(qa.scene_id);
                fda::Prediction p;
                if (pr_mode == "open") {
                    p = ck.model.predict_open_ended(scene, qa.tokens, ck.config.variant);
                } else {
                    if (!qa.choices)
                        throw fda::Error("qa " + std::to_string(qa.id) + " has no choices");
                    p = ck.model.predict_multiple_choice(scene, qa.tokens, *qa.choices,
                                                         ck.config.variant);
                }
                json rec = {{"qa_id", qa.id},
                            {"answer", p.answer},
                            {"prob", p.prob},
                            {"mode", pr_mode},
                            {"trace", trace_json(p.trace)}};
                out << rec.dump() << '\n';
            }
            std::cout << "predictions written to " << pr_out << "\n";
        });

        // ---------------- trace ----------------
        auto* trc = app.add_subcommand("trace", "render attention traces for chosen qa ids");
        std::string trc_ckpt, trc_data, trc_csv;
        std::vector<std::uint64_t> trc_ids;
        trc->add_option("--ckpt", trc_ckpt)->required();
        trc->add_option("--data", trc_data)->required();
        trc->add_option("--qa", trc_ids, "qa ids (all when omitted)");
        trc->add_option("--csv", trc_csv, "also write trace CSV here");
        trc->callback([&] {
            fda::Checkpoint ck = fda::load_checkpoint(trc_ckpt);
            const fda::Dataset ds = fda::read_dataset(trc_data);
            std::ostringstream csv;
            for (const auto& qa : ds.samples) {
                if (!trc_ids.empty() &&
                    std::find(trc_ids.begin(), trc_ids.end(), qa.id) == trc_ids.end())
                    continue;
                const fda::Scene& scene = ds.scene_by_id(qa.scene_id);
                const auto matches = fda::match_objects(qa.tokens, scene, ck.model.matcher,
                                                        ck.config.dims.threshold);
                const fda::SelectionTrace trace = fda::build_visual_sequence(matches, scene);
                std::cout << "qa " << qa.id << ": ";
                for (const auto& t : qa.tokens) std::cout << t << ' ';
                std::cout << "\n" << fda::explain_trace(trace, scene, qa.tokens) << "\n";
                csv << fda::trace_csv(trace);
            }
            if (!trc_csv.empty()) write_file(trc_csv, csv.str());
        });

        // ---------------- ablate ----------------
        auto* ab = app.add_subcommand("ablate", "train and evaluate the full variant ladder");
        std::string ab_data, ab_out = default_out_dir();
        std::vector<std::uint64_t> ab_seeds = {7};
        std::string ab_config;
        fda::TrainConfig ab_tc;
        ab->add_option("--data", ab_data, "dataset directory")->required();
        ab->add_option("--seeds", ab_seeds, "one training run per seed");
        ab->add_option("--out", ab_out, "output directory");
        ab->add_option("--config", ab_config, "train config JSON file");
        ab->add_option("--epochs", ab_tc.epochs);
        ab->callback([&] {
            fda::TrainConfig base = ab_tc;
            if (!ab_config.empty()) base = fda::TrainConfig::from_json(read_file(ab_config));
            const fda::Dataset train_set = fda::read_dataset(ab_data + "/train.jsonl");
            const fda::Dataset val_set = fda::read_dataset(ab_data + "/val.jsonl");
            const fda::Dataset test_set = fda::read_dataset(ab_data + "/test.jsonl");
            fs::create_directories(ab_out);
            const fda::AblationReport report = fda::run_ablation(
                train_set, val_set, test_set, base, ab_seeds,
                [&](fda::Variant v, std::uint64_t seed, fda::TrainResult& res,
                    const fda::TrainConfig& cfg) {
                    fda::TrainConfig c = cfg;
                    c.dims.visual = train_set.visual_dim;
                    fda::save_checkpoint(ab_out + "/" + fda::variant_name(v) + "_seed" +
                                             std::to_string(seed) + ".ckpt",
                                         res.model, c, res.best_epoch,
                                         res.history.empty()
                                             ? 0.0
                                             : res.history.back().val.all.value_or(0.0));
                });
            write_file(ab_out + "/ablation.csv", report.to_csv());
            write_file(ab_out + "/ablation.txt", report.to_text());
            std::cout << report.to_text();
        });

        // ---------------- grad-check ----------------
        auto* gc = app.add_subcommand(
            "grad-check", "finite-difference check of all variants at toy dims");
        gc->callback([&] {
            if (run_grad_check() != 0) throw fda::Error("gradient check failed");
        });

        // ---------------- plot ----------------
        auto* pl = app.add_subcommand("plot", "metrics CSV to SVG learning curve and bars");
        std::string pl_metrics, pl_out = default_out_dir();
        pl->add_option("--metrics", pl_metrics, "metrics history CSV")->required();
        pl->add_option("--out", pl_out, "output directory");
        pl->callback([&] {
            const auto rows = parse_metrics_csv(pl_metrics);
            if (rows.empty()) throw fda::Error("metrics CSV has no rows");
            fs::create_directories(pl_out);

            std::vector<fda::Series> curves;
            for (const auto& r : rows) {
                const std::string label = r.variant + "/" + r.split;
                auto it = std::find_if(curves.begin(), curves.end(),
                                       [&](const fda::Series& s) { return s.label == label; });
                if (it == curves.end()) {
                    curves.push_back({label, {}, {}});
                    it = curves.end() - 1;
                }
                it->x.push_back(static_cast<double>(r.epoch));
                it->y.push_back(r.loss);
            }
            write_file(pl_out + "/learning_curve.svg",
                       fda::svg_line_chart(curves, "training loss", "epoch", "loss"));

            std::vector<std::pair<std::string, double>> bars;
            for (const auto& r : rows) {
                if (r.split != "val" || !r.all) continue;
                auto it = std::find_if(bars.begin(), bars.end(), [&](const auto& b) {
                    return b.first == r.variant;
                });
                if (it == bars.end()) bars.push_back({r.variant, *r.all});
                else it->second = *r.all;  // last epoch wins
            }
            if (!bars.empty())
                write_file(pl_out + "/accuracy.svg",
                           fda::svg_bar_chart(bars, "validation accuracy", "accuracy"));
            std::cout << "plots written to " << pl_out << "\n";
        });

        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
