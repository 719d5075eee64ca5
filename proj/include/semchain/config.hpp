#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "semchain/agents.hpp"
#include "semchain/embedding_store.hpp"
#include "semchain/plan.hpp"
#include "semchain/prompts.hpp"
#include "semchain/synthetic_vocab.hpp"

namespace semchain {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Either a vector file or a generated clustered vocabulary.
struct EmbeddingSource {
    std::optional<std::filesystem::path> path;
    VectorFormat format = VectorFormat::word2vec_binary;
    std::optional<SyntheticVocabSpec> synthetic;
};

struct ServiceSettings {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t machine_workers = 2;
    std::optional<std::chrono::milliseconds> turn_timeout;
    std::uint64_t seed = 0;
};

// Parsed configuration file. Relative paths are resolved against the
// directory holding the file.
struct AppConfig {
    std::filesystem::path base_dir;
    ExperimentPlan plan;
    EmbeddingSource embeddings;
    VocabFilterRules filter;
    std::optional<nlohmann::json> provider;
    std::optional<std::filesystem::path> prompts;
    std::filesystem::path log_dir = "logs";
    ServiceSettings service;
    std::size_t jobs = 1;
};

// Throws ConfigError on unknown keys or malformed values.
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& path);
SyntheticVocabSpec parse_synthetic_spec(const nlohmann::json& j);
// parse_vector_format, reporting an unknown name as a ConfigError.
VectorFormat config_vector_format(std::string_view name);

// A vector file is filtered with the configured rules on load; filtering is
// idempotent, so prepared files come through unchanged.
EmbeddingTable load_table(const AppConfig& config);

// Everything agents need, owned in one place.
struct Runtime {
    std::unique_ptr<EmbeddingTable> table;
    std::unique_ptr<PromptLibrary> prompts;
    std::shared_ptr<ChatClient> llm;

    AgentEnvironment environment(bool deterministic) const;
};

// Builds the chat client only when the config has a provider block.
Runtime make_runtime(const AppConfig& config);

}  // namespace semchain
