#include "semchain/config.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
}

}  // namespace

VectorFormat config_vector_format(std::string_view name) {
    try {
        return parse_vector_format(name);
    } catch (const EmbeddingError& e) {
        throw ConfigError(e.what());
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path out = p;
    return out.is_relative() ? base / out : out;
}

}  // namespace

SyntheticVocabSpec parse_synthetic_spec(const json& j) {
    check_keys(j, {"words", "dim", "topics", "subtopics_per_topic", "topic_weight", "subtopic_weight", "noise_weight",
                   "seed", "anchors"},
               "embeddings.synthetic");
    SyntheticVocabSpec s;
    s.words = j.value("words", s.words);
    s.dim = j.value("dim", s.dim);
    s.topics = j.value("topics", s.topics);
    s.subtopics_per_topic = j.value("subtopics_per_topic", s.subtopics_per_topic);
    s.topic_weight = j.value("topic_weight", s.topic_weight);
    s.subtopic_weight = j.value("subtopic_weight", s.subtopic_weight);
    s.noise_weight = j.value("noise_weight", s.noise_weight);
    s.seed = j.value("seed", s.seed);
    s.anchors = j.value("anchors", s.anchors);
    return s;
}

AppConfig parse_config(const json& j, const fs::path& base_dir) {
    try {
        check_keys(j, {"plan", "embeddings", "filter", "provider", "prompts", "log_dir", "service", "jobs"}, "config");
        AppConfig c;
        c.base_dir = base_dir;
        if (j.contains("plan")) {
            c.plan = j.at("plan").get<ExperimentPlan>();
            validate(c.plan);
        }

        const auto& e = j.value("embeddings", json::object());
        check_keys(e, {"path", "format", "synthetic"}, "embeddings");
        if (e.contains("path") == e.contains("synthetic")) {
            throw ConfigError("embeddings needs exactly one of 'path' or 'synthetic'");
        }
        if (e.contains("path")) c.embeddings.path = resolve(base_dir, e.at("path").get<std::string>());
        if (e.contains("format")) c.embeddings.format = config_vector_format(e.at("format").get<std::string>());
        if (e.contains("synthetic")) {
            c.embeddings.synthetic = parse_synthetic_spec(e.at("synthetic"));
            // Plan targets must exist in the generated vocabulary.
            auto& anchors = c.embeddings.synthetic->anchors;
            for (const auto& t : c.plan.targets) {
                if (std::find(anchors.begin(), anchors.end(), t) == anchors.end()) anchors.push_back(t);
            }
        }

        if (j.contains("filter")) {
            const auto& f = j.at("filter");
            check_keys(f, {"require_all_lowercase", "require_alphabetic_only", "min_length"}, "filter");
            c.filter.require_all_lowercase = f.value("require_all_lowercase", c.filter.require_all_lowercase);
            c.filter.require_alphabetic_only = f.value("require_alphabetic_only", c.filter.require_alphabetic_only);
            c.filter.min_length = f.value("min_length", c.filter.min_length);
        }
        if (j.contains("provider")) c.provider = j.at("provider");
        if (j.contains("prompts")) c.prompts = resolve(base_dir, j.at("prompts").get<std::string>());
        c.log_dir = resolve(base_dir, j.value("log_dir", std::string("logs")));
        c.jobs = j.value("jobs", c.jobs);
        if (c.jobs == 0) throw ConfigError("jobs must be >= 1");

        if (j.contains("service")) {
            const auto& s = j.at("service");
            check_keys(s, {"host", "port", "machine_workers", "turn_timeout_s", "seed"}, "service");
            c.service.host = s.value("host", c.service.host);
            c.service.port = s.value("port", c.service.port);
            c.service.machine_workers = s.value("machine_workers", c.service.machine_workers);
            c.service.seed = s.value("seed", c.service.seed);
            if (s.contains("turn_timeout_s") && !s.at("turn_timeout_s").is_null()) {
                const double secs = s.at("turn_timeout_s").get<double>();
                if (!(secs > 0)) throw ConfigError("service.turn_timeout_s must be positive");
                c.service.turn_timeout = std::chrono::milliseconds(static_cast<long long>(secs * 1000));
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

AppConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(fmt::format("'{}' is not valid JSON", path.string()));
    return parse_config(j, fs::absolute(path).parent_path());
}

EmbeddingTable load_table(const AppConfig& config) {
    if (config.embeddings.synthetic) return make_synthetic_table(*config.embeddings.synthetic);
    return filter_vocabulary(load_embeddings(*config.embeddings.path, config.embeddings.format), config.filter);
}

AgentEnvironment Runtime::environment(bool deterministic) const {
    AgentEnvironment env;
    env.table = table.get();
    env.llm = llm;
    env.prompts = prompts.get();
    env.deterministic = deterministic;
    return env;
}

Runtime make_runtime(const AppConfig& config) {
    Runtime rt;
    rt.table = std::make_unique<EmbeddingTable>(load_table(config));
    rt.prompts = std::make_unique<PromptLibrary>();
    if (config.prompts) {
        try {
            rt.prompts->load(*config.prompts);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(fmt::format("prompts: {}", e.what()));
        }
    }
    if (config.provider) rt.llm = make_chat_client(*config.provider, config.base_dir);
    const auto& targets = config.plan.targets.empty() ? default_targets() : config.plan.targets;
    for (const auto& t : targets) {
        if (!rt.table->contains(t)) throw ConfigError(fmt::format("target '{}' is not in the vocabulary", t));
    }
    return rt;
}

}  // namespace semchain
