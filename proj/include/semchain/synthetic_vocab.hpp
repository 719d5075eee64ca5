#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semchain/embedding_store.hpp"

namespace semchain {

// The ten hidden words used by the default experiment plan.
const std::vector<std::string>& default_targets();

// Parameters for a clustered stand-in vocabulary. Words are pronounceable
// lowercase pseudo-words grouped into topics, each split into subtopics:
//
//   v = topic_weight * topic + subtopic_weight * subtopic + noise_weight * noise
//
// so similarity is high inside a subtopic, moderate inside a topic and near
// zero across topics. Anchor words are placed in distinct topics.
struct SyntheticVocabSpec {
    std::size_t words = 10000;
    std::size_t dim = 64;
    std::size_t topics = 20;
    std::size_t subtopics_per_topic = 10;
    double topic_weight = 1.0;
    double subtopic_weight = 0.9;
    double noise_weight = 0.6;
    std::uint64_t seed = 1;
    std::vector<std::string> anchors = default_targets();
};

EmbeddingTable make_synthetic_table(const SyntheticVocabSpec& spec);

}  // namespace semchain
