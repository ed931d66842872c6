#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "titl/corpus.hpp"
#include "titl/errors.hpp"

namespace titl {

using Vector = std::vector<float>;

struct Hyperparams {
    std::uint32_t dim = 100;
    std::uint32_t window = 5;
    std::uint32_t negatives = 5;
    std::uint32_t epochs = 10;
    double lr0 = 0.05;
    std::uint32_t ngram_min = 3;
    std::uint32_t ngram_max = 6;
    std::uint64_t buckets = 2'000'000;
    std::uint32_t min_count = 1;
    double subsample_t = 1e-4;
    std::uint64_t seed = 1;

    // Throws ValidationError naming the first bad field.
    void validate() const;

    bool operator==(const Hyperparams&) const = default;
};

// Dense row-major float matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const float> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

struct VocabEntry {
    std::string word;
    std::uint64_t count = 0;

    bool operator==(const VocabEntry&) const = default;
};

// Trained subword skip-gram model. Immutable once built; safe for concurrent reads.
class EmbeddingModel {
public:
    EmbeddingModel() = default;
    // Allocates zeroed matrices sized from hp and vocab.
    EmbeddingModel(Hyperparams hp, std::vector<VocabEntry> vocab);

    const Hyperparams& hyperparams() const { return hp_; }
    std::size_t dim() const { return hp_.dim; }

    const std::vector<VocabEntry>& vocab() const { return vocab_; }
    std::optional<std::size_t> word_index(std::string_view word) const;

    Matrix& input_word_vectors() { return input_words_; }
    const Matrix& input_word_vectors() const { return input_words_; }
    Matrix& input_bucket_vectors() { return input_buckets_; }
    const Matrix& input_bucket_vectors() const { return input_buckets_; }
    Matrix& output_vectors() { return output_; }
    const Matrix& output_vectors() const { return output_; }

    bool operator==(const EmbeddingModel& other) const;

private:
    Hyperparams hp_;
    std::vector<VocabEntry> vocab_;
    std::unordered_map<std::string, std::size_t> lookup_;
    Matrix input_words_;
    Matrix input_buckets_;
    Matrix output_;
};

struct IndexEntry {
    std::uint64_t sentence_id = 0;
    std::string text;
    Vector vector;

    bool operator==(const IndexEntry&) const = default;
};

// Precomputed sentence vectors stored alongside their text.
struct SentenceIndex {
    std::uint32_t dim = 0;
    std::vector<IndexEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool operator==(const SentenceIndex&) const = default;
};

// Character n-grams of "<word>", lengths ngram_min..ngram_max, shortest first
// and left to right within a length. Characters are Unicode scalar values.
std::vector<std::string> extract_ngrams(std::string_view word, std::size_t ngram_min,
                                        std::size_t ngram_max);

// FNV-1a 32-bit over the UTF-8 bytes, modulo buckets.
std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t buckets);

// Bucket rows of every n-gram of word, in extract_ngrams order.
std::vector<std::uint64_t> subword_buckets(const Hyperparams& hp, std::string_view word);

// Mean of the whole-word vector (if in vocabulary) and the word's n-gram
// bucket vectors; zero vector when there is nothing to average.
Vector word_vector(const EmbeddingModel& model, std::string_view word);

// Mean of word vectors; zero vector for no tokens.
Vector sentence_vector(const EmbeddingModel& model, std::span<const std::string> tokens);

// dot(u,v)/(|u||v|) computed in double; 0 when either norm is 0.
template <typename A, typename B>
double cosine(std::span<const A> u, std::span<const B> v) {
    if (u.size() != v.size())
        throw ContractViolation("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i], b = v[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
}

inline double cosine(const Vector& u, const Vector& v) {
    return cosine(std::span<const float>(u), std::span<const float>(v));
}

struct TrainingLog {
    std::vector<double> epoch_mean_loss;  // mean skip-gram loss per (center, context) pair
    std::uint64_t pairs = 0;
    std::uint64_t tokens_processed = 0;
};

// Skip-gram with negative sampling over subword-composed inputs. A pure
// function of (corpus tokens, hp): identical inputs give bit-identical models.
// Throws TrainingError for an empty corpus or an empty vocabulary.
EmbeddingModel train(const Corpus& corpus, const Hyperparams& hp, TrainingLog* log = nullptr);

SentenceIndex build_index(const EmbeddingModel& model, const Corpus& corpus);

}  // namespace titl
