#include "semchain/synthetic_vocab.hpp"

#include <cmath>
#include <unordered_set>

#include "semchain/rng.hpp"

namespace semchain {

const std::vector<std::string>& default_targets() {
    static const std::vector<std::string> targets = {"harbor",  "door",      "pencil",        "lantern",
                                                     "river",   "compass",   "satellite",     "metamorphosis",
                                                     "topography", "vessel"};
    return targets;
}

namespace {

std::string pseudo_word(Rng& rng) {
    static constexpr std::string_view consonants = "bcdfghjklmnprstvwz";
    static constexpr std::string_view vowels = "aeiou";
    const std::size_t syllables = 2 + uniform_index(rng, 3);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
        w.push_back(consonants[uniform_index(rng, consonants.size())]);
        w.push_back(vowels[uniform_index(rng, vowels.size())]);
    }
    if (bernoulli(rng, 0.3)) w.push_back(consonants[uniform_index(rng, consonants.size())]);
    return w;
}

std::vector<double> gaussian_direction(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (auto& x : v) x = standard_normal(rng) * scale;
    return v;
}

}  // namespace

EmbeddingTable make_synthetic_table(const SyntheticVocabSpec& spec) {
    const std::size_t clusters = spec.topics * spec.subtopics_per_topic;
    if (spec.words == 0 || spec.dim == 0 || clusters == 0) {
        throw EmbeddingError("synthetic vocabulary needs words, dim and clusters > 0");
    }
    if (spec.anchors.size() > spec.words) throw EmbeddingError("more anchors than words");

    Rng rng(mix_seed(spec.seed, 0x5eed));
    std::vector<std::vector<double>> topic_dirs;
    std::vector<std::vector<double>> sub_dirs;
    for (std::size_t t = 0; t < spec.topics; ++t) topic_dirs.push_back(gaussian_direction(rng, spec.dim));
    for (std::size_t c = 0; c < clusters; ++c) sub_dirs.push_back(gaussian_direction(rng, spec.dim));

    std::unordered_set<std::string> used(spec.anchors.begin(), spec.anchors.end());
    std::vector<std::string> words;
    std::vector<float> data;
    words.reserve(spec.words);
    data.reserve(spec.words * spec.dim);

    for (std::size_t i = 0; i < spec.words; ++i) {
        std::string word;
        std::size_t cluster = 0;
        if (i < spec.anchors.size()) {
            word = spec.anchors[i];
            // Anchor i lives in topic i (mod topics), first subtopic.
            cluster = (i % spec.topics) * spec.subtopics_per_topic;
        } else {
            do {
                word = pseudo_word(rng);
            } while (!used.insert(word).second);
            cluster = (i - spec.anchors.size()) % clusters;
        }
        const auto& topic = topic_dirs[cluster / spec.subtopics_per_topic];
        const auto& sub = sub_dirs[cluster];
        const auto noise = gaussian_direction(rng, spec.dim);
        for (std::size_t d = 0; d < spec.dim; ++d) {
            data.push_back(static_cast<float>(spec.topic_weight * topic[d] + spec.subtopic_weight * sub[d] +
                                              spec.noise_weight * noise[d]));
        }
        words.push_back(std::move(word));
    }
    return EmbeddingTable(std::move(words), std::move(data), spec.dim);
}

}  // namespace semchain
