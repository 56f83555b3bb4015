#include "fda/attention.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace fda {

std::vector<Match> match_objects(const std::vector<std::string>& tokens, const Scene& scene,
                                 const MatcherSpace& matcher, double threshold) {
    if (threshold < -1.0 || threshold > 1.0)
        throw Error("match_objects: threshold must lie in [-1, 1]");
    std::vector<Match> out;
    for (std::size_t w = 0; w < tokens.size(); ++w) {
        const Vec wv = matcher.word_vec(tokens[w]);
        for (std::size_t o = 0; o < scene.objects.size(); ++o) {
            const Vec lv = matcher.labels.lookup(scene.objects[o].label);
            const double sim = cosine_similarity(wv, lv);
            if (sim > threshold)
                out.push_back(Match{w, tokens[w], o, scene.objects[o].label, sim});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
        if (a.word_position != b.word_position) return a.word_position < b.word_position;
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.object_index < b.object_index;
    });
    return out;
}

SelectionTrace build_visual_sequence(const std::vector<Match>& matches, const Scene& scene) {
    SelectionTrace trace;
    trace.matches = matches;
    for (const auto& m : matches) {
        if (m.object_index >= scene.objects.size())
            throw Error("build_visual_sequence: match references object " +
                        std::to_string(m.object_index) + " but scene has " +
                        std::to_string(scene.objects.size()));
        if (std::find(trace.feed_objects.begin(), trace.feed_objects.end(), m.object_index) !=
            trace.feed_objects.end())
            continue;  // first matched position wins
        trace.feed_objects.push_back(m.object_index);
        trace.feed_sequence.push_back(scene.objects[m.object_index].feature);
    }
    trace.feed_sequence.push_back(scene.global_feature);
    return trace;
}

namespace {
std::string sim2(double s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", s);
    return buf;
}
}  // namespace

std::string explain_trace(const SelectionTrace& trace, const Scene& scene,
                          const std::vector<std::string>& tokens) {
    std::ostringstream out;
    if (trace.matches.empty()) {
        out << "no word/object matches; feeding global feature only\n";
    } else {
        for (const auto& m : trace.matches) {
            if (m.word_position >= tokens.size())
                throw Error("explain_trace: trace inconsistent with tokens");
            out << m.word << " -> " << m.label << " (" << sim2(m.similarity) << ")\n";
        }
    }
    out << "feed order:";
    for (std::size_t idx : trace.feed_objects)
        out << " [" << idx << ":" << scene.objects[idx].label << "]";
    out << " [global]\n";
    return out.str();
}

std::string trace_csv(const SelectionTrace& trace) {
    std::ostringstream out;
    out << "word_position,word,object_index,label,similarity,feed_rank\n";
    for (const auto& m : trace.matches) {
        auto it = std::find(trace.feed_objects.begin(), trace.feed_objects.end(),
                            m.object_index);
        const long rank = it == trace.feed_objects.end()
                              ? -1
                              : it - trace.feed_objects.begin();
        out << m.word_position << ',' << m.word << ',' << m.object_index << ',' << m.label
            << ',' << m.similarity << ',' << rank << '\n';
    }
    return out.str();
}

}  // namespace fda
