#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semchain {

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfVocabulary : public EmbeddingError {
public:
    explicit OutOfVocabulary(std::string_view word)
        : EmbeddingError("word not in vocabulary: '" + std::string(word) + "'") {}
};

enum class VectorFormat { word2vec_binary, word2vec_text };

VectorFormat parse_vector_format(std::string_view name);
std::string_view to_string(VectorFormat format);

struct VocabFilterRules {
    bool require_all_lowercase = true;
    bool require_alphabetic_only = true;
    std::size_t min_length = 1;

    bool accepts(std::string_view token) const;
};

struct Neighbor {
    std::string word;
    double similarity = 0.0;

    bool operator==(const Neighbor&) const = default;
};

// Immutable word -> vector table. Vectors are kept exactly as loaded; norms are
// computed once at construction so cosine is a single dot product.
//
// Construction rejects empty tokens, tokens containing whitespace, duplicates,
// non-finite components and zero vectors. The lowercase/alphabetic invariant
// holds for any table produced by filter_vocabulary() with the default rules.
class EmbeddingTable {
public:
    EmbeddingTable(std::vector<std::string> words, std::vector<float> data, std::size_t dim);

    std::size_t size() const { return words_.size(); }
    std::size_t dim() const { return dim_; }

    const std::vector<std::string>& words() const { return words_; }
    const std::string& word(std::size_t row) const { return words_.at(row); }

    std::optional<std::size_t> find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word).has_value(); }
    std::size_t row_of(std::string_view word) const;  // throws OutOfVocabulary

    std::span<const float> vector(std::size_t row) const;
    double norm(std::size_t row) const { return norms_.at(row); }

    // Clamped to [-1, 1]; symmetric in its arguments.
    double cosine_rows(std::size_t a, std::size_t b) const;
    double cosine(std::string_view a, std::string_view b) const;

    // The k most similar words to `word`, never including `word` itself or
    // anything in `exclude`. Sorted by similarity descending, ties by word
    // ascending. Returns fewer than k entries when candidates run out.
    std::vector<Neighbor> nearest_neighbors(std::string_view word, std::size_t k,
                                            const std::unordered_set<std::string>& exclude = {}) const;

private:
    std::vector<std::string> words_;
    std::vector<float> data_;
    std::vector<double> norms_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dim_ = 0;
};

EmbeddingTable load_embeddings(std::istream& in, VectorFormat format);
EmbeddingTable load_embeddings(const std::filesystem::path& path, VectorFormat format);

void write_embeddings(std::ostream& out, const EmbeddingTable& table, VectorFormat format);
void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, VectorFormat format);

// Keeps the rows whose token satisfies every rule, in source order.
// Throws EmbeddingError if nothing survives.
EmbeddingTable filter_vocabulary(const EmbeddingTable& table, const VocabFilterRules& rules);

}  // namespace semchain
