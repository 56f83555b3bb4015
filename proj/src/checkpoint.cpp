#include "fda/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace fda {

using nlohmann::json;

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw Error("checkpoint: truncated payload");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& data) {
    write_u64(out, data.size());
    for (double d : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        write_u64(out, bits);
    }
}

std::vector<double> read_doubles(std::istream& in, std::size_t expect) {
    const std::uint64_t n = read_u64(in);
    if (n != expect)
        throw Error("checkpoint: payload has " + std::to_string(n) +
                    " values where header declares " + std::to_string(expect));
    std::vector<double> out(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t bits = read_u64(in);
        std::memcpy(&out[i], &bits, 8);
    }
    return out;
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model, const TrainConfig& config,
                     std::size_t epoch, double val_metric) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint: " + path);

    json groups = json::array();
    for (ParamGroup* g : model.all_groups())
        groups.push_back({{"name", g->name},
                          {"rows", g->value.rows},
                          {"cols", g->value.cols},
                          {"trainable", g->trainable}});
    groups.push_back({{"name", "matcher.embeddings"},
                      {"rows", model.matcher.embeddings.rows},
                      {"cols", model.matcher.embeddings.cols},
                      {"trainable", false}});

    std::vector<std::string> labels;
    for (const auto& [l, v] : model.matcher.labels.table) labels.push_back(l);

    // The header's config carries the model's actual dims (the visual dim is
    // taken from the data at build time), so loading can rebuild the shapes.
    TrainConfig stored = config;
    stored.dims = model.dims;
    json header = {{"version", kCheckpointVersion},
                   {"config", json::parse(stored.to_json())},
                   {"vocab", model.vocab.tokens()},
                   {"answers", model.answers.answers()},
                   {"matcher_words", model.matcher.words.tokens()},
                   {"matcher_labels", labels},
                   {"epoch", epoch},
                   {"val_metric", val_metric},
                   {"groups", groups}};
    out << header.dump() << '\n';

    for (ParamGroup* g : model.all_groups()) write_doubles(out, g->value.data);
    write_doubles(out, model.matcher.embeddings.data);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("checkpoint: missing header");
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(std::string("checkpoint: bad header: ") + e.what());
    }

    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion)
        throw Error("checkpoint version " + std::to_string(version) +
                    " is not supported by this build (expects version " +
                    std::to_string(kCheckpointVersion) + ")");

    Checkpoint ck;
    ck.config = TrainConfig::from_json(header.at("config").dump());
    ck.epoch = header.at("epoch").get<std::size_t>();
    ck.val_metric = header.at("val_metric").get<double>();

    auto vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
    if (vocab_tokens.empty() || vocab_tokens[0] != "<unk>")
        throw Error("checkpoint: vocabulary must start with <unk>");
    Vocabulary vocab = Vocabulary::from_tokens(
        std::vector<std::string>(vocab_tokens.begin() + 1, vocab_tokens.end()));

    AnswerVocabulary answers =
        AnswerVocabulary::from_list(header.at("answers").get<std::vector<std::string>>());

    auto mwords = header.at("matcher_words").get<std::vector<std::string>>();
    if (mwords.empty() || mwords[0] != "<unk>")
        throw Error("checkpoint: matcher vocabulary must start with <unk>");
    MatcherSpace matcher;
    matcher.words = Vocabulary::from_tokens(
        std::vector<std::string>(mwords.begin() + 1, mwords.end()));

    ck.model = Model(ck.config.dims, std::move(vocab), std::move(answers), MatcherSpace{});
    ck.model.matcher.words = matcher.words;

    const json& groups = header.at("groups");
    auto live = ck.model.all_groups();
    if (groups.size() != live.size() + 1)
        throw Error("checkpoint: header declares " + std::to_string(groups.size()) +
                    " groups, model has " + std::to_string(live.size() + 1));

    for (std::size_t i = 0; i < live.size(); ++i) {
        const json& g = groups[i];
        if (g.at("name").get<std::string>() != live[i]->name)
            throw Error("checkpoint: group '" + g.at("name").get<std::string>() +
                        "' where '" + live[i]->name + "' expected");
        if (g.at("rows").get<std::size_t>() != live[i]->value.rows ||
            g.at("cols").get<std::size_t>() != live[i]->value.cols)
            throw Error("checkpoint: shape mismatch for group " + live[i]->name);
        live[i]->value.data = read_doubles(in, live[i]->value.size());
    }

    const json& mg = groups[live.size()];
    if (mg.at("name").get<std::string>() != "matcher.embeddings")
        throw Error("checkpoint: missing matcher.embeddings payload");
    const std::size_t mr = mg.at("rows").get<std::size_t>();
    const std::size_t mc = mg.at("cols").get<std::size_t>();
    ck.model.matcher.embeddings = Matrix(mr, mc);
    ck.model.matcher.embeddings.data = read_doubles(in, mr * mc);

    ck.model.matcher.labels.dim = mc;
    for (const auto& l : header.at("matcher_labels").get<std::vector<std::string>>()) {
        if (!ck.model.matcher.words.contains(l))
            throw Error("checkpoint: matcher label '" + l + "' missing from matcher words");
        ck.model.matcher.labels.table[l] =
            ck.model.matcher.embeddings.row(ck.model.matcher.words.lookup(l));
    }
    return ck;
}

}  // namespace fda
