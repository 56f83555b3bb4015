#pragma once

#include <string>
#include <vector>

#include "fda/lexicon.hpp"
#include "fda/sceneworld.hpp"

namespace fda {

// Question-word-driven object selection: cosine-match question words against
// object labels in embedding space, then feed the matched region features to
// the visual LSTM in question word order, global feature last.

inline constexpr double kDefaultMatchThreshold = 0.5;

struct Match {
    std::size_t word_position = 0;
    std::string word;
    std::size_t object_index = 0;
    std::string label;
    double similarity = 0.0;
};

struct SelectionTrace {
    std::vector<Match> matches;       // ordered by word_position
    std::vector<Vec> feed_sequence;   // deduplicated region features, then global
    std::vector<std::size_t> feed_objects;  // object index per region entry
};

// All (word, object) pairs with cosine similarity strictly above threshold,
// sorted by word position, then descending similarity, then object index.
std::vector<Match> match_objects(const std::vector<std::string>& tokens, const Scene& scene,
                                 const MatcherSpace& matcher,
                                 double threshold = kDefaultMatchThreshold);

// Feed order follows the matches; an object matched more than once is fed at
// its first matched position only. The global feature is always last; with
// no matches the feed is the global feature alone.
SelectionTrace build_visual_sequence(const std::vector<Match>& matches, const Scene& scene);

std::string explain_trace(const SelectionTrace& trace, const Scene& scene,
                          const std::vector<std::string>& tokens);

std::string trace_csv(const SelectionTrace& trace);

}  // namespace fda
