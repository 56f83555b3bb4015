#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fda/lexicon.hpp"
#include "fda/rng.hpp"
#include "fda/tensor.hpp"

namespace fda {

// Synthetic stand-in for images + QA annotations. Local features carry the
// object's attributes in fixed code blocks; the global feature carries only
// scene-level aggregates (counts, background), so per-object attribute
// conflicts cannot be resolved from it.

struct BBox {
    double x = 0, y = 0, w = 0, h = 0;
};

struct SceneObject {
    std::string label;  // noun
    std::string color;
    std::string size;
    BBox bbox;
    Vec feature;
};

struct Scene {
    std::uint64_t id = 0;
    std::string background;
    std::vector<SceneObject> objects;
    Vec global_feature;
};

enum class QType { yesno, number, color, other };

std::string qtype_name(QType q);
QType qtype_from_name(const std::string& s);

struct QASample {
    std::uint64_t id = 0;
    std::uint64_t scene_id = 0;
    std::vector<std::string> tokens;
    std::string answer;
    QType qtype = QType::other;
    std::optional<std::vector<std::string>> choices;  // exactly 18 incl. answer
};

struct SceneConfig {
    std::size_t min_objects = 2;
    std::size_t max_objects = 5;
    std::vector<std::string> nouns = {"ball", "cube", "frisbee", "mouse", "umbrella", "cone"};
    std::vector<std::string> colors = {"red", "blue", "green", "yellow",
                                       "white", "black", "purple", "orange"};
    std::vector<std::string> sizes = {"small", "medium", "large"};
    std::vector<std::string> backgrounds = {"indoor", "outdoor", "studio"};
    std::size_t visual_dim = 32;
    double noise = 0.1;
    double distractor_prob = 0.5;  // chance of a same-noun pair with conflicting colors
    std::size_t num_choices = 18;

    std::size_t local_code_dim() const;
    std::size_t global_code_dim() const;
    void validate() const;

    std::string to_json() const;
    static SceneConfig from_json(const std::string& text);
};

inline constexpr std::size_t kMaxCountAnswer = 9;

// Deterministic attribute encoding plus gaussian noise.
Vec synth_object_feature(const SceneConfig& cfg, const SceneObject& obj, Rng& rng);
Vec synth_global_feature(const SceneConfig& cfg, const Scene& scene, Rng& rng);

Scene generate_scene(Rng& rng, const SceneConfig& cfg, std::uint64_t id);
QASample generate_question(Rng& rng, const Scene& scene, const SceneConfig& cfg,
                           std::uint64_t id, bool with_choices);

// Closed answer set implied by a config: colors, sizes, digits 0..9, yes/no.
std::vector<std::string> answer_inventory(const SceneConfig& cfg);

// Lowercase, strip punctuation, split on whitespace.
std::vector<std::string> tokenize(const std::string& text);

struct Dataset {
    std::size_t visual_dim = 0;
    std::vector<Scene> scenes;
    std::vector<QASample> samples;

    const Scene& scene_by_id(std::uint64_t id) const;
};

Dataset generate_dataset(std::uint64_t seed, const SceneConfig& cfg, std::size_t n_questions,
                         bool with_choices);

void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

// True when two objects share a noun but disagree on color: the scenes an
// attention mechanism is needed for.
bool has_color_conflict(const Scene& scene);

// Matcher space covering a config's nouns (with plural synonyms), attribute
// words and the question templates' function words.
MatcherSpace build_sceneworld_matcher(const SceneConfig& cfg);

}  // namespace fda
