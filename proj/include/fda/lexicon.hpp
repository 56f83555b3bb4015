#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fda/numerics.hpp"
#include "fda/rng.hpp"

namespace fda {

// Token vocabulary with UNK reserved at index 0. Construction is a pure
// function of the corpus token multiset: descending frequency, ties broken
// lexicographically.
class Vocabulary {
public:
    static constexpr std::size_t kUnk = 0;

    Vocabulary();  // just UNK
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus);
    static Vocabulary from_tokens(std::vector<std::string> tokens);  // order preserved, UNK prepended if absent

    std::size_t lookup(const std::string& token) const;  // UNK when missing
    bool contains(const std::string& token) const;
    const std::string& token(std::size_t index) const;
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Embedding matrix keyed by a Vocabulary. The trainable table is a
// ParamGroup so the tape can accumulate into looked-up rows; frozen tables
// never receive gradient.
struct EmbeddingTable {
    ParamGroup rows;  // vocab_size x embed_dim
    bool frozen = false;

    EmbeddingTable() = default;
    EmbeddingTable(std::string name, std::size_t vocab_size, std::size_t dim, bool frozen_);
    std::size_t dim() const { return rows.value.cols; }
};

EmbeddingTable make_trainable_embeddings(std::size_t vocab_size, std::size_t dim,
                                         double init_range, Rng& rng);

// One tape node per token, in order; unknowns resolve to the UNK row.
std::vector<Tape::Id> embed_tokens(Tape& tape, const Vocabulary& vocab,
                                   EmbeddingTable& table,
                                   const std::vector<std::string>& tokens);

// Text word-vector format: one entry per line, "token v1 v2 ... vd",
// single-space separated.
std::pair<Vocabulary, EmbeddingTable> load_pretrained_embeddings(const std::string& path);
void save_embeddings(const std::string& path, const Vocabulary& vocab, const Matrix& table);

// Object-label -> embedding vector map used by the attention matcher.
// Labels with no entry resolve to a zero vector and therefore never match.
struct LabelEmbeddings {
    std::size_t dim = 0;
    std::map<std::string, Vec> table;

    Vec lookup(const std::string& label) const {
        auto it = table.find(label);
        return it == table.end() ? Vec(dim, 0.0) : it->second;
    }
};

// Matcher word table: every word gets a unit vector. Words listed as
// synonym pairs (word, canonical) share most of their direction, giving
// cosine ~0.95; all other distinct pairs are orthogonal.
struct MatcherSpace {
    Vocabulary words;      // matcher vocabulary (no UNK semantics; missing -> zero vec)
    Matrix embeddings;     // words.size() x dim
    LabelEmbeddings labels;

    Vec word_vec(const std::string& w) const {
        if (!words.contains(w)) return Vec(embeddings.cols, 0.0);
        return embeddings.row(words.lookup(w));
    }
};

MatcherSpace build_matcher_space(const std::vector<std::string>& labels,
                                 const std::vector<std::string>& other_words,
                                 const std::vector<std::pair<std::string, std::string>>& synonyms);

}  // namespace fda
