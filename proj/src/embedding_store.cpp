#include "semchain/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "semchain/atomic_file.hpp"

namespace semchain {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

struct Header {
    std::size_t count = 0;
    std::size_t dim = 0;
};

Header read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw EmbeddingError("malformed header: empty input");
    }
    std::istringstream fields(line);
    long long count = -1;
    long long dim = -1;
    std::string extra;
    if (!(fields >> count >> dim) || (fields >> extra)) {
        throw EmbeddingError(fmt::format("malformed header: '{}'", line));
    }
    if (count <= 0) {
        throw EmbeddingError("zero-length vocabulary");
    }
    if (dim <= 0) {
        throw EmbeddingError(fmt::format("malformed header: dimension {}", dim));
    }
    return {static_cast<std::size_t>(count), static_cast<std::size_t>(dim)};
}

float float_from_le(const std::array<unsigned char, 4>& b) {
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::array<char, 4> float_to_le(float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    return {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
            static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
}

EmbeddingTable load_binary(std::istream& in) {
    const Header header = read_header(in);
    std::vector<std::string> words;
    std::vector<float> data;
    words.reserve(header.count);
    data.reserve(header.count * header.dim);

    for (std::size_t entry = 0; entry < header.count; ++entry) {
        std::string word;
        int c = in.get();
        // The previous record may end with a newline byte.
        while (c == '\n') c = in.get();
        while (c != EOF && c != ' ') {
            word.push_back(static_cast<char>(c));
            c = in.get();
        }
        if (c == EOF) {
            throw EmbeddingError(fmt::format("truncated vector data at entry {} of {}", entry + 1, header.count));
        }
        for (std::size_t d = 0; d < header.dim; ++d) {
            std::array<unsigned char, 4> bytes{};
            in.read(reinterpret_cast<char*>(bytes.data()), 4);
            if (in.gcount() != 4) {
                throw EmbeddingError(fmt::format("truncated vector data for '{}'", word));
            }
            data.push_back(float_from_le(bytes));
        }
        words.push_back(std::move(word));
    }
    return EmbeddingTable(std::move(words), std::move(data), header.dim);
}

EmbeddingTable load_text(std::istream& in) {
    const Header header = read_header(in);
    std::vector<std::string> words;
    std::vector<float> data;
    words.reserve(header.count);
    data.reserve(header.count * header.dim);

    std::string line;
    std::size_t line_no = 1;
    while (words.size() < header.count && std::getline(in, line)) {
        ++line_no;
        if (line.empty() || std::all_of(line.begin(), line.end(), is_space)) continue;
        std::istringstream fields(line);
        std::string word;
        fields >> word;
        std::size_t components = 0;
        std::string token;
        while (fields >> token) {
            char* end = nullptr;
            const float value = std::strtof(token.c_str(), &end);
            if (end == token.c_str() || *end != '\0') {
                throw EmbeddingError(fmt::format("line {}: bad number '{}'", line_no, token));
            }
            if (components < header.dim) data.push_back(value);
            ++components;
        }
        if (components != header.dim) {
            throw EmbeddingError(fmt::format("line {}: dimension mismatch for '{}' (expected {}, got {})", line_no,
                                             word, header.dim, components));
        }
        words.push_back(std::move(word));
    }
    if (words.size() != header.count) {
        throw EmbeddingError(
            fmt::format("truncated vector data: header declares {} words, found {}", header.count, words.size()));
    }
    return EmbeddingTable(std::move(words), std::move(data), header.dim);
}

}  // namespace

VectorFormat parse_vector_format(std::string_view name) {
    if (name == "word2vec-binary" || name == "binary" || name == "bin") return VectorFormat::word2vec_binary;
    if (name == "word2vec-text" || name == "text" || name == "txt") return VectorFormat::word2vec_text;
    throw EmbeddingError(fmt::format("unknown vector format '{}'", name));
}

std::string_view to_string(VectorFormat format) {
    return format == VectorFormat::word2vec_binary ? "word2vec-binary" : "word2vec-text";
}

bool VocabFilterRules::accepts(std::string_view token) const {
    if (token.size() < std::max<std::size_t>(min_length, 1)) return false;
    for (const char c : token) {
        const auto u = static_cast<unsigned char>(c);
        if (require_alphabetic_only && !std::isalpha(u)) return false;
        if (require_all_lowercase && std::isupper(u)) return false;
        if (require_alphabetic_only && require_all_lowercase && !(c >= 'a' && c <= 'z')) return false;
    }
    return true;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, std::vector<float> data, std::size_t dim)
    : words_(std::move(words)), data_(std::move(data)), dim_(dim) {
    if (dim_ == 0) throw EmbeddingError("embedding dimension must be positive");
    if (words_.empty()) throw EmbeddingError("zero-length vocabulary");
    if (data_.size() != words_.size() * dim_) {
        throw EmbeddingError(fmt::format("dimension mismatch: {} words x {} dims needs {} components, got {}",
                                         words_.size(), dim_, words_.size() * dim_, data_.size()));
    }
    norms_.resize(words_.size());
    index_.reserve(words_.size());
    for (std::size_t row = 0; row < words_.size(); ++row) {
        const auto& w = words_[row];
        if (w.empty() || std::any_of(w.begin(), w.end(), is_space)) {
            throw EmbeddingError(fmt::format("row {}: invalid token '{}'", row, w));
        }
        if (!index_.emplace(w, row).second) {
            throw EmbeddingError(fmt::format("duplicate word '{}'", w));
        }
        double sq = 0.0;
        for (const float x : vector(row)) {
            if (!std::isfinite(x)) throw EmbeddingError(fmt::format("non-finite component in '{}'", w));
            sq += static_cast<double>(x) * x;
        }
        if (sq == 0.0) throw EmbeddingError(fmt::format("zero vector for '{}'", w));
        norms_[row] = std::sqrt(sq);
    }
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view word) const {
    const auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t EmbeddingTable::row_of(std::string_view word) const {
    const auto row = find(word);
    if (!row) throw OutOfVocabulary(word);
    return *row;
}

std::span<const float> EmbeddingTable::vector(std::size_t row) const {
    return {data_.data() + row * dim_, dim_};
}

double EmbeddingTable::cosine_rows(std::size_t a, std::size_t b) const {
    const auto va = vector(a);
    const auto vb = vector(b);
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<double>(va[i]) * vb[i];
    // Multiplying the norms in a fixed order keeps cosine(a,b) == cosine(b,a) bit-exact.
    const double denom = std::min(norms_[a], norms_[b]) * std::max(norms_[a], norms_[b]);
    return std::clamp(dot / denom, -1.0, 1.0);
}

double EmbeddingTable::cosine(std::string_view a, std::string_view b) const {
    return cosine_rows(row_of(a), row_of(b));
}

std::vector<Neighbor> EmbeddingTable::nearest_neighbors(std::string_view word, std::size_t k,
                                                        const std::unordered_set<std::string>& exclude) const {
    if (k == 0) throw EmbeddingError("nearest_neighbors: k must be >= 1");
    const std::size_t query = row_of(word);

    std::vector<char> skip(size(), 0);
    skip[query] = 1;
    for (const auto& w : exclude) {
        if (const auto row = find(w)) skip[*row] = 1;
    }

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(size());
    for (std::size_t row = 0; row < size(); ++row) {
        if (!skip[row]) scored.emplace_back(cosine_rows(query, row), row);
    }
    const auto better = [this](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return words_[x.second] < words_[y.second];
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);

    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back({words_[scored[i].second], scored[i].first});
    return out;
}

EmbeddingTable load_embeddings(std::istream& in, VectorFormat format) {
    return format == VectorFormat::word2vec_binary ? load_binary(in) : load_text(in);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, VectorFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EmbeddingError(fmt::format("cannot open '{}'", path.string()));
    return load_embeddings(in, format);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table, VectorFormat format) {
    out << table.size() << ' ' << table.dim() << '\n';
    for (std::size_t row = 0; row < table.size(); ++row) {
        out << table.word(row);
        if (format == VectorFormat::word2vec_binary) {
            out.put(' ');
            for (const float x : table.vector(row)) out.write(float_to_le(x).data(), 4);
            out.put('\n');
        } else {
            for (const float x : table.vector(row)) out << ' ' << fmt::format("{:.9g}", x);
            out << '\n';
        }
    }
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingTable& table, VectorFormat format) {
    std::ostringstream buffer(std::ios::binary);
    write_embeddings(buffer, table, format);
    write_file_atomic(path, buffer.str());
}

EmbeddingTable filter_vocabulary(const EmbeddingTable& table, const VocabFilterRules& rules) {
    if (rules.min_length < 1) throw EmbeddingError("min_length must be >= 1");
    std::vector<std::string> words;
    std::vector<float> data;
    for (std::size_t row = 0; row < table.size(); ++row) {
        if (!rules.accepts(table.word(row))) continue;
        words.push_back(table.word(row));
        const auto v = table.vector(row);
        data.insert(data.end(), v.begin(), v.end());
    }
    if (words.empty()) throw EmbeddingError("vocabulary filter removed every word");
    return EmbeddingTable(std::move(words), std::move(data), table.dim());
}

}  // namespace semchain
