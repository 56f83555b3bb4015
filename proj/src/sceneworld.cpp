#include "fda/sceneworld.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fda {

using nlohmann::json;

std::string qtype_name(QType q) {
    switch (q) {
        case QType::yesno: return "yesno";
        case QType::number: return "number";
        case QType::color: return "color";
        case QType::other: return "other";
    }
    throw Error("bad qtype");
}

QType qtype_from_name(const std::string& s) {
    if (s == "yesno") return QType::yesno;
    if (s == "number") return QType::number;
    if (s == "color") return QType::color;
    if (s == "other") return QType::other;
    throw Error("unknown qtype '" + s + "'");
}

std::size_t SceneConfig::local_code_dim() const {
    return nouns.size() + colors.size() + sizes.size() + 4;
}

std::size_t SceneConfig::global_code_dim() const {
    return 1 + nouns.size() + backgrounds.size();
}

void SceneConfig::validate() const {
    if (min_objects < 1 || max_objects < min_objects)
        throw Error("SceneConfig: invalid object count range");
    if (max_objects > kMaxCountAnswer)
        throw Error("SceneConfig: max_objects exceeds the count-answer cap of 9");
    if (nouns.empty() || sizes.empty() || backgrounds.empty())
        throw Error("SceneConfig: empty attribute inventory");
    if (colors.size() < 2)
        throw Error("SceneConfig: need at least two colors for conflicting distractors");
    if (visual_dim < std::max(local_code_dim(), global_code_dim()))
        throw Error("SceneConfig: visual_dim " + std::to_string(visual_dim) +
                    " is smaller than the attribute code length " +
                    std::to_string(std::max(local_code_dim(), global_code_dim())));
    const std::size_t n_answers = answer_inventory(*this).size();
    if (n_answers < num_choices)
        throw Error("SceneConfig: answer inventory (" + std::to_string(n_answers) +
                    ") smaller than the choice-list size " + std::to_string(num_choices));
}

std::string SceneConfig::to_json() const {
    json j = {{"min_objects", min_objects},
              {"max_objects", max_objects},
              {"nouns", nouns},
              {"colors", colors},
              {"sizes", sizes},
              {"backgrounds", backgrounds},
              {"visual_dim", visual_dim},
              {"noise", noise},
              {"distractor_prob", distractor_prob},
              {"num_choices", num_choices}};
    return j.dump();
}

SceneConfig SceneConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("invalid scene config JSON: ") + e.what());
    }
    SceneConfig c;
    c.min_objects = j.value("min_objects", c.min_objects);
    c.max_objects = j.value("max_objects", c.max_objects);
    c.nouns = j.value("nouns", c.nouns);
    c.colors = j.value("colors", c.colors);
    c.sizes = j.value("sizes", c.sizes);
    c.backgrounds = j.value("backgrounds", c.backgrounds);
    c.visual_dim = j.value("visual_dim", c.visual_dim);
    c.noise = j.value("noise", c.noise);
    c.distractor_prob = j.value("distractor_prob", c.distractor_prob);
    c.num_choices = j.value("num_choices", c.num_choices);
    c.validate();
    return c;
}

std::vector<std::string> answer_inventory(const SceneConfig& cfg) {
    std::vector<std::string> out;
    out.insert(out.end(), cfg.colors.begin(), cfg.colors.end());
    out.insert(out.end(), cfg.sizes.begin(), cfg.sizes.end());
    for (std::size_t i = 0; i <= kMaxCountAnswer; ++i) out.push_back(std::to_string(i));
    out.push_back("yes");
    out.push_back("no");
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            clean.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else if (std::isspace(static_cast<unsigned char>(c)))
            clean.push_back(' ');
        // punctuation dropped
    }
    std::vector<std::string> out;
    std::istringstream ss(clean);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

namespace {

std::size_t index_of(const std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    if (it == v.end()) throw Error("value '" + s + "' not in inventory");
    return static_cast<std::size_t>(it - v.begin());
}

void add_noise(Vec& v, double scale, Rng& rng) {
    if (scale == 0.0) return;
    for (double& x : v) x += scale * rng.gaussian();
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
    // splitmix64 over (seed, stream, index)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream * 0x100000001ull + i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

Vec synth_object_feature(const SceneConfig& cfg, const SceneObject& obj, Rng& rng) {
    Vec f(cfg.visual_dim, 0.0);
    std::size_t off = 0;
    f[off + index_of(cfg.nouns, obj.label)] = 1.0;
    off += cfg.nouns.size();
    f[off + index_of(cfg.colors, obj.color)] = 1.0;
    off += cfg.colors.size();
    f[off + index_of(cfg.sizes, obj.size)] = 1.0;
    off += cfg.sizes.size();
    f[off + 0] = obj.bbox.x;
    f[off + 1] = obj.bbox.y;
    f[off + 2] = obj.bbox.w;
    f[off + 3] = obj.bbox.h;
    add_noise(f, cfg.noise, rng);
    return f;
}

Vec synth_global_feature(const SceneConfig& cfg, const Scene& scene, Rng& rng) {
    Vec f(cfg.visual_dim, 0.0);
    const double inv = 1.0 / static_cast<double>(kMaxCountAnswer);
    f[0] = static_cast<double>(scene.objects.size()) * inv;
    for (const auto& obj : scene.objects)
        f[1 + index_of(cfg.nouns, obj.label)] += inv;
    f[1 + cfg.nouns.size() + index_of(cfg.backgrounds, scene.background)] = 1.0;
    add_noise(f, cfg.noise, rng);
    return f;
}

Scene generate_scene(Rng& rng, const SceneConfig& cfg, std::uint64_t id) {
    cfg.validate();
    Scene scene;
    scene.id = id;
    scene.background = cfg.backgrounds[rng.uniform_index(cfg.backgrounds.size())];

    const std::size_t n = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(cfg.min_objects),
                        static_cast<std::int64_t>(cfg.max_objects)));
    scene.objects.resize(n);
    for (auto& obj : scene.objects) {
        obj.label = cfg.nouns[rng.uniform_index(cfg.nouns.size())];
        obj.color = cfg.colors[rng.uniform_index(cfg.colors.size())];
        obj.size = cfg.sizes[rng.uniform_index(cfg.sizes.size())];
        obj.bbox.x = rng.uniform(0.0, 0.8);
        obj.bbox.y = rng.uniform(0.0, 0.8);
        obj.bbox.w = rng.uniform(0.05, 0.2);
        obj.bbox.h = rng.uniform(0.05, 0.2);
    }

    // Conflicting distractor pair: same noun, different colors.
    if (n >= 2 && rng.uniform() < cfg.distractor_prob) {
        scene.objects[1].label = scene.objects[0].label;
        while (scene.objects[1].color == scene.objects[0].color)
            scene.objects[1].color = cfg.colors[rng.uniform_index(cfg.colors.size())];
    }

    for (auto& obj : scene.objects) obj.feature = synth_object_feature(cfg, obj, rng);
    scene.global_feature = synth_global_feature(cfg, scene, rng);
    return scene;
}

bool has_color_conflict(const Scene& scene) {
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        for (std::size_t j = i + 1; j < scene.objects.size(); ++j)
            if (scene.objects[i].label == scene.objects[j].label &&
                scene.objects[i].color != scene.objects[j].color)
                return true;
    return false;
}

namespace {

// Nouns whose instances agree on the given attribute; empty when none.
template <typename Get>
std::vector<std::string> unambiguous_nouns(const Scene& scene, Get get) {
    std::vector<std::string> out;
    for (const auto& obj : scene.objects) {
        bool consistent = true;
        for (const auto& other : scene.objects)
            if (other.label == obj.label && get(other) != get(obj)) consistent = false;
        if (consistent && std::find(out.begin(), out.end(), obj.label) == out.end())
            out.push_back(obj.label);
    }
    return out;
}

std::vector<std::string> make_choices(Rng& rng, const SceneConfig& cfg,
                                      const std::string& answer) {
    std::vector<std::string> pool = answer_inventory(cfg);
    pool.erase(std::remove(pool.begin(), pool.end(), answer), pool.end());
    rng.shuffle(pool);
    pool.resize(cfg.num_choices - 1);
    const std::size_t pos = rng.uniform_index(cfg.num_choices);
    pool.insert(pool.begin() + static_cast<std::ptrdiff_t>(pos), answer);
    return pool;
}

}  // namespace

QASample generate_question(Rng& rng, const Scene& scene, const SceneConfig& cfg,
                           std::uint64_t id, bool with_choices) {
    if (scene.objects.empty()) throw Error("generate_question: empty scene");
    QASample qa;
    qa.id = id;
    qa.scene_id = scene.id;

    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::uint64_t family = rng.uniform_index(4);
        if (family == 0 || family == 1) {  // attribute question
            const bool want_color = family == 0;
            auto nouns = want_color
                             ? unambiguous_nouns(scene, [](const SceneObject& o) { return o.color; })
                             : unambiguous_nouns(scene, [](const SceneObject& o) { return o.size; });
            if (nouns.empty()) continue;  // resample family
            std::sort(nouns.begin(), nouns.end());
            const std::string noun = nouns[rng.uniform_index(nouns.size())];
            const SceneObject* obj = nullptr;
            for (const auto& o : scene.objects)
                if (o.label == noun) obj = &o;
            qa.tokens = tokenize(std::string("what ") + (want_color ? "color" : "size") +
                                 " is the " + noun);
            qa.answer = want_color ? obj->color : obj->size;
            qa.qtype = want_color ? QType::color : QType::other;
        } else if (family == 2) {  // count
            const std::string noun = cfg.nouns[rng.uniform_index(cfg.nouns.size())];
            std::size_t count = 0;
            for (const auto& o : scene.objects)
                if (o.label == noun) ++count;
            qa.tokens = tokenize("how many " + noun + "s are there");
            qa.answer = std::to_string(count);
            qa.qtype = QType::number;
        } else {  // existence
            const std::string noun = cfg.nouns[rng.uniform_index(cfg.nouns.size())];
            bool present = false;
            for (const auto& o : scene.objects)
                if (o.label == noun) present = true;
            qa.tokens = tokenize("is there a " + noun);
            qa.answer = present ? "yes" : "no";
            qa.qtype = QType::yesno;
        }
        if (with_choices) qa.choices = make_choices(rng, cfg, qa.answer);
        return qa;
    }
    throw Error("generate_question: no feasible template for scene " +
                std::to_string(scene.id));
}

Dataset generate_dataset(std::uint64_t seed, const SceneConfig& cfg, std::size_t n_questions,
                         bool with_choices) {
    cfg.validate();
    Dataset ds;
    ds.visual_dim = cfg.visual_dim;
    ds.scenes.resize(n_questions);
    ds.samples.resize(n_questions);
    // One independent rng stream per item: shards are order-free.
    const std::int64_t n = static_cast<std::int64_t>(n_questions);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t u = static_cast<std::uint64_t>(i);
        Rng rng(mix(seed, 0, u));
        ds.scenes[u] = generate_scene(rng, cfg, u);
        Rng qrng(mix(seed, 1, u));
        ds.samples[u] = generate_question(qrng, ds.scenes[u], cfg, u, with_choices);
    }
    return ds;
}

const Scene& Dataset::scene_by_id(std::uint64_t id) const {
    auto it = std::lower_bound(scenes.begin(), scenes.end(), id,
                               [](const Scene& s, std::uint64_t v) { return s.id < v; });
    if (it == scenes.end() || it->id != id)
        throw Error("dataset: dangling scene_id " + std::to_string(id));
    return *it;
}

namespace {

json bbox_to_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

BBox bbox_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw Error("bbox must be [x,y,w,h]");
    return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset file: " + path);

    json meta = {{"kind", "meta"}, {"version", 1}, {"visual_dim", ds.visual_dim}};
    out << meta.dump() << '\n';

    for (const auto& s : ds.scenes) {
        json objs = json::array();
        for (const auto& o : s.objects)
            objs.push_back({{"label", o.label},
                            {"color", o.color},
                            {"size", o.size},
                            {"bbox", bbox_to_json(o.bbox)},
                            {"feature", o.feature}});
        json rec = {{"kind", "scene"},
                    {"id", s.id},
                    {"background", s.background},
                    {"global_feature", s.global_feature},
                    {"objects", objs}};
        out << rec.dump() << '\n';
    }
    for (const auto& q : ds.samples) {
        json rec = {{"kind", "qa"},
                    {"id", q.id},
                    {"scene_id", q.scene_id},
                    {"tokens", q.tokens},
                    {"answer", q.answer},
                    {"qtype", qtype_name(q.qtype)}};
        if (q.choices) rec["choices"] = *q.choices;
        out << rec.dump() << '\n';
    }
}

Dataset read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path);

    Dataset ds;
    bool have_meta = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
        }
        try {
            const std::string kind = rec.at("kind").get<std::string>();
            if (kind == "meta") {
                if (have_meta) throw Error("duplicate meta record");
                if (rec.at("version").get<int>() != 1)
                    throw Error("unsupported dataset version");
                ds.visual_dim = rec.at("visual_dim").get<std::size_t>();
                have_meta = true;
            } else if (kind == "scene") {
                if (!have_meta) throw Error("scene record before meta");
                Scene s;
                s.id = rec.at("id").get<std::uint64_t>();
                s.background = rec.value("background", std::string());
                s.global_feature = rec.at("global_feature").get<Vec>();
                for (const auto& jo : rec.at("objects")) {
                    SceneObject o;
                    o.label = jo.at("label").get<std::string>();
                    o.color = jo.at("color").get<std::string>();
                    o.size = jo.at("size").get<std::string>();
                    o.bbox = bbox_from_json(jo.at("bbox"));
                    o.feature = jo.at("feature").get<Vec>();
                    if (o.feature.size() != ds.visual_dim)
                        throw Error("object feature dim != visual_dim");
                    s.objects.push_back(std::move(o));
                }
                if (s.global_feature.size() != ds.visual_dim)
                    throw Error("global feature dim != visual_dim");
                ds.scenes.push_back(std::move(s));
            } else if (kind == "qa") {
                if (!have_meta) throw Error("qa record before meta");
                QASample q;
                q.id = rec.at("id").get<std::uint64_t>();
                q.scene_id = rec.at("scene_id").get<std::uint64_t>();
                q.tokens = rec.at("tokens").get<std::vector<std::string>>();
                q.answer = rec.at("answer").get<std::string>();
                q.qtype = qtype_from_name(rec.at("qtype").get<std::string>());
                if (rec.contains("choices")) {
                    auto c = rec.at("choices").get<std::vector<std::string>>();
                    if (std::count(c.begin(), c.end(), q.answer) != 1)
                        throw Error("choices must contain the answer exactly once");
                    q.choices = std::move(c);
                }
                ds.samples.push_back(std::move(q));
            } else {
                throw Error("unknown record kind '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_meta) throw Error(path + ": missing meta record");
    for (const auto& q : ds.samples) ds.scene_by_id(q.scene_id);  // validate references
    return ds;
}

MatcherSpace build_sceneworld_matcher(const SceneConfig& cfg) {
    std::vector<std::string> other = cfg.colors;
    other.insert(other.end(), cfg.sizes.begin(), cfg.sizes.end());
    for (const char* w : {"what", "color", "size", "is", "the", "how", "many", "are",
                          "there", "a"})
        if (std::find(other.begin(), other.end(), w) == other.end()) other.emplace_back(w);

    std::vector<std::pair<std::string, std::string>> synonyms;
    for (const auto& noun : cfg.nouns) synonyms.emplace_back(noun + "s", noun);
    return build_matcher_space(cfg.nouns, other, synonyms);
}

}  // namespace fda
