#include "fda/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fda {

Vocabulary::Vocabulary() {
    tokens_ = {"<unk>"};
    index_["<unk>"] = 0;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus) {
    if (corpus.empty()) throw Error("build_vocabulary: empty corpus");
    std::map<std::string, std::size_t> freq;
    for (const auto& line : corpus)
        for (const auto& tok : line) ++freq[tok];
    if (freq.empty()) throw Error("build_vocabulary: corpus contains no tokens");

    std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (const auto& [tok, n] : items) {
        if (v.index_.count(tok)) continue;
        v.index_[tok] = v.tokens_.size();
        v.tokens_.push_back(tok);
    }
    return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
    Vocabulary v;
    for (auto& tok : tokens) {
        if (v.index_.count(tok)) throw Error("Vocabulary: duplicate token '" + tok + "'");
        v.index_[tok] = v.tokens_.size();
        v.tokens_.push_back(std::move(tok));
    }
    return v;
}

std::size_t Vocabulary::lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocabulary::token(std::size_t index) const {
    if (index >= tokens_.size()) throw Error("Vocabulary: index out of range");
    return tokens_[index];
}

EmbeddingTable::EmbeddingTable(std::string name, std::size_t vocab_size, std::size_t dim,
                               bool frozen_)
    : rows(std::move(name), vocab_size, dim, !frozen_), frozen(frozen_) {}

EmbeddingTable make_trainable_embeddings(std::size_t vocab_size, std::size_t dim,
                                         double init_range, Rng& rng) {
    EmbeddingTable t("embed", vocab_size, dim, false);
    for (double& v : t.rows.value.data) v = rng.uniform(-init_range, init_range);
    return t;
}

std::vector<Tape::Id> embed_tokens(Tape& tape, const Vocabulary& vocab, EmbeddingTable& table,
                                   const std::vector<std::string>& tokens) {
    if (table.rows.value.rows != vocab.size())
        throw Error("embed_tokens: table has " + std::to_string(table.rows.value.rows) +
                    " rows but vocabulary has " + std::to_string(vocab.size()));
    std::vector<Tape::Id> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) out.push_back(tape.embed(table.rows, vocab.lookup(tok)));
    return out;
}

std::pair<Vocabulary, EmbeddingTable> load_pretrained_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding file: " + path);

    std::vector<std::string> tokens;
    std::vector<Vec> vectors;
    std::size_t dim = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        Vec v;
        double x;
        while (ss >> x) v.push_back(x);
        if (!ss.eof())
            throw Error(path + ":" + std::to_string(lineno) + ": non-numeric field");
        if (v.empty())
            throw Error(path + ":" + std::to_string(lineno) + ": no vector values");
        if (dim == 0) dim = v.size();
        if (v.size() != dim)
            throw Error(path + ":" + std::to_string(lineno) + ": dimension " +
                        std::to_string(v.size()) + " != " + std::to_string(dim));
        if (std::find(tokens.begin(), tokens.end(), tok) != tokens.end())
            throw Error(path + ":" + std::to_string(lineno) + ": duplicate token '" + tok + "'");
        tokens.push_back(tok);
        vectors.push_back(std::move(v));
    }
    if (tokens.empty()) throw Error(path + ": empty embedding file");

    Vocabulary vocab = Vocabulary::from_tokens(tokens);
    EmbeddingTable table("pretrained", vocab.size(), dim, true);
    // UNK row stays zero
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        double* dst = table.rows.value.row_ptr(vocab.lookup(tokens[i]));
        std::copy(vectors[i].begin(), vectors[i].end(), dst);
    }
    return {std::move(vocab), std::move(table)};
}

void save_embeddings(const std::string& path, const Vocabulary& vocab, const Matrix& table) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write embedding file: " + path);
    out.precision(17);
    for (std::size_t i = 1; i < vocab.size(); ++i) {  // skip UNK
        out << vocab.token(i);
        for (std::size_t j = 0; j < table.cols; ++j) out << ' ' << table(i, j);
        out << '\n';
    }
}

MatcherSpace build_matcher_space(
    const std::vector<std::string>& labels, const std::vector<std::string>& other_words,
    const std::vector<std::pair<std::string, std::string>>& synonyms) {
    // Canonical words (labels + everything else) each own one axis; synonym
    // words lean on their canonical's axis plus a private one.
    std::vector<std::string> canon = labels;
    for (const auto& w : other_words)
        if (std::find(canon.begin(), canon.end(), w) == canon.end()) canon.push_back(w);

    std::vector<std::string> all = canon;
    for (const auto& [syn, base] : synonyms) {
        if (std::find(canon.begin(), canon.end(), base) == canon.end())
            throw Error("matcher synonym base '" + base + "' is not a canonical word");
        if (std::find(all.begin(), all.end(), syn) != all.end())
            throw Error("matcher synonym '" + syn + "' already present");
        all.push_back(syn);
    }

    MatcherSpace space;
    space.words = Vocabulary::from_tokens(all);
    const std::size_t dim = all.size() + 1;  // +1 for the UNK row's (unused) axis
    space.embeddings = Matrix(space.words.size(), dim);

    constexpr double kSynCos = 0.95;
    auto axis = [&](const std::string& w) { return space.words.lookup(w); };
    for (const auto& w : canon) {
        const std::size_t r = space.words.lookup(w);
        space.embeddings(r, r) = 1.0;
    }
    for (const auto& [syn, base] : synonyms) {
        const std::size_t r = axis(syn);
        space.embeddings(r, axis(base)) = kSynCos;
        space.embeddings(r, r) = std::sqrt(1.0 - kSynCos * kSynCos);
    }

    space.labels.dim = dim;
    for (const auto& l : labels) space.labels.table[l] = space.embeddings.row(axis(l));
    return space;
}

}  // namespace fda
