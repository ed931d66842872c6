#include "titl/embeddings.hpp"

#include "titl/utf8.hpp"

namespace titl {

void Hyperparams::validate() const {
    auto require = [](bool ok, const char* field, const char* why) {
        if (!ok) throw ValidationError(std::string("hyperparameter ") + field + ": " + why);
    };
    require(dim > 0, "dim", "must be positive");
    require(window > 0, "window", "must be positive");
    require(negatives > 0, "negatives", "must be positive");
    require(epochs > 0, "epochs", "must be positive");
    require(lr0 > 0 && std::isfinite(lr0), "lr0", "must be a positive finite number");
    require(ngram_min > 0, "ngram_min", "must be positive");
    require(ngram_max >= ngram_min, "ngram_max", "must be >= ngram_min");
    require(buckets > 0, "buckets", "must be positive");
    require(min_count > 0, "min_count", "must be positive");
    require(subsample_t >= 0 && std::isfinite(subsample_t), "subsample_t",
            "must be a non-negative finite number");
}

EmbeddingModel::EmbeddingModel(Hyperparams hp, std::vector<VocabEntry> vocab)
    : hp_(hp),
      vocab_(std::move(vocab)),
      input_words_(vocab_.size(), hp.dim),
      input_buckets_(hp.buckets, hp.dim),
      output_(vocab_.size(), hp.dim) {
    lookup_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) lookup_.emplace(vocab_[i].word, i);
}

std::optional<std::size_t> EmbeddingModel::word_index(std::string_view word) const {
    auto it = lookup_.find(std::string(word));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

bool EmbeddingModel::operator==(const EmbeddingModel& other) const {
    return hp_ == other.hp_ && vocab_ == other.vocab_ && input_words_ == other.input_words_ &&
           input_buckets_ == other.input_buckets_ && output_ == other.output_;
}

std::vector<std::string> extract_ngrams(std::string_view word, std::size_t ngram_min,
                                        std::size_t ngram_max) {
    std::u32string wrapped = U"<";
    wrapped += utf8::decode(word);
    wrapped += U">";

    std::vector<std::string> out;
    for (std::size_t n = ngram_min; n <= ngram_max && n <= wrapped.size(); ++n)
        for (std::size_t i = 0; i + n <= wrapped.size(); ++i)
            out.push_back(utf8::encode(std::u32string_view(wrapped).substr(i, n)));
    return out;
}

std::uint64_t hash_ngram(std::string_view ngram, std::uint64_t buckets) {
    std::uint32_t h = 2166136261u;
    for (char c : ngram) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 16777619u;
    }
    return static_cast<std::uint64_t>(h) % buckets;
}

std::vector<std::uint64_t> subword_buckets(const Hyperparams& hp, std::string_view word) {
    std::vector<std::uint64_t> ids;
    for (const auto& g : extract_ngrams(word, hp.ngram_min, hp.ngram_max))
        ids.push_back(hash_ngram(g, hp.buckets));
    return ids;
}

Vector word_vector(const EmbeddingModel& model, std::string_view word) {
    const std::size_t dim = model.dim();
    std::vector<double> acc(dim, 0.0);
    std::size_t n = 0;
    auto add = [&](std::span<const float> row) {
        for (std::size_t d = 0; d < dim; ++d) acc[d] += row[d];
        ++n;
    };
    if (auto idx = model.word_index(word)) add(model.input_word_vectors().row(*idx));
    for (auto b : subword_buckets(model.hyperparams(), word)) add(model.input_bucket_vectors().row(b));

    Vector out(dim, 0.0f);
    if (n == 0) return out;
    for (std::size_t d = 0; d < dim; ++d) out[d] = static_cast<float>(acc[d] / static_cast<double>(n));
    return out;
}

Vector sentence_vector(const EmbeddingModel& model, std::span<const std::string> tokens) {
    const std::size_t dim = model.dim();
    Vector out(dim, 0.0f);
    if (tokens.empty()) return out;
    std::vector<double> acc(dim, 0.0);
    for (const auto& tok : tokens) {
        const Vector wv = word_vector(model, tok);
        for (std::size_t d = 0; d < dim; ++d) acc[d] += wv[d];
    }
    for (std::size_t d = 0; d < dim; ++d)
        out[d] = static_cast<float>(acc[d] / static_cast<double>(tokens.size()));
    return out;
}

SentenceIndex build_index(const EmbeddingModel& model, const Corpus& corpus) {
    SentenceIndex index;
    index.dim = static_cast<std::uint32_t>(model.dim());
    index.entries.reserve(corpus.size());
    for (const auto& s : corpus.sentences)
        index.entries.push_back(IndexEntry{s.id, s.text, sentence_vector(model, s.tokens)});
    return index;
}

}  // namespace titl
