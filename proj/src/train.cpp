#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "titl/embeddings.hpp"
#include "titl/skipgram.hpp"

namespace titl {
namespace {

// Portable [0,1) draw: std::uniform_real_distribution is not bit-identical
// across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<VocabEntry> build_vocab(const Corpus& corpus, std::uint32_t min_count) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : corpus.sentences)
        for (const auto& t : s.tokens) ++counts[t];

    std::vector<VocabEntry> vocab;
    for (auto& [w, c] : counts)
        if (c >= min_count) vocab.push_back({w, c});
    std::sort(vocab.begin(), vocab.end(), [](const VocabEntry& a, const VocabEntry& b) {
        return a.count != b.count ? a.count > b.count : a.word < b.word;
    });
    return vocab;
}

// Draws vocabulary ids proportionally to count^0.75.
class NegativeSampler {
public:
    explicit NegativeSampler(const std::vector<VocabEntry>& vocab) {
        cumulative_.reserve(vocab.size());
        double total = 0.0;
        for (const auto& v : vocab) {
            total += std::pow(static_cast<double>(v.count), 0.75);
            cumulative_.push_back(total);
        }
    }

    std::size_t draw(std::mt19937_64& rng) const {
        const double x = unit(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        if (it == cumulative_.end()) --it;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

private:
    std::vector<double> cumulative_;
};

}  // namespace

EmbeddingModel train(const Corpus& corpus, const Hyperparams& hp, TrainingLog* log) {
    hp.validate();
    if (corpus.empty() || corpus.token_count == 0) throw TrainingError("cannot train on an empty corpus");

    auto vocab = build_vocab(corpus, hp.min_count);
    if (vocab.empty())
        throw TrainingError("vocabulary is empty after min_count=" + std::to_string(hp.min_count) +
                            " filtering");

    EmbeddingModel model(hp, std::move(vocab));
    std::mt19937_64 rng(hp.seed);
    const float bound = 1.0f / static_cast<float>(hp.dim);
    for (Matrix* m : {&model.input_word_vectors(), &model.input_bucket_vectors()})
        for (float& x : m->data()) x = static_cast<float>((2.0 * unit(rng) - 1.0) * bound);

    const auto& words = model.vocab();
    const std::size_t nwords = words.size();

    std::vector<std::vector<std::uint64_t>> word_buckets(nwords);
    for (std::size_t i = 0; i < nwords; ++i) word_buckets[i] = subword_buckets(hp, words[i].word);

    std::uint64_t vocab_tokens = 0;
    for (const auto& w : words) vocab_tokens += w.count;
    std::vector<double> keep_prob(nwords, 1.0);
    if (hp.subsample_t > 0) {
        for (std::size_t i = 0; i < nwords; ++i) {
            const double f = static_cast<double>(words[i].count) / static_cast<double>(vocab_tokens);
            const double r = hp.subsample_t / f;
            keep_prob[i] = std::sqrt(r) + r;
        }
    }

    const NegativeSampler sampler(words);
    const double total_tokens = static_cast<double>(hp.epochs) * static_cast<double>(corpus.token_count);
    constexpr double kFinalLrRatio = 1e-4;

    Matrix& inputs = model.input_word_vectors();
    Matrix& buckets = model.input_bucket_vectors();
    Matrix& outputs = model.output_vectors();

    std::uint64_t processed = 0;
    std::vector<std::size_t> line;
    std::vector<std::span<float>> contributors;
    std::vector<std::span<float>> negatives;

    for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::uint64_t epoch_pairs = 0;

        for (const auto& sentence : corpus.sentences) {
            const double progress = static_cast<double>(processed) / total_tokens;
            const float lr = static_cast<float>(hp.lr0 * (1.0 - progress * (1.0 - kFinalLrRatio)));
            processed += sentence.tokens.size();

            line.clear();
            for (const auto& tok : sentence.tokens) {
                auto idx = model.word_index(tok);
                if (!idx) continue;
                if (keep_prob[*idx] < 1.0 && unit(rng) > keep_prob[*idx]) continue;
                line.push_back(*idx);
            }

            for (std::size_t i = 0; i < line.size(); ++i) {
                const std::size_t center = line[i];
                contributors.clear();
                contributors.push_back(inputs.row(center));
                for (auto b : word_buckets[center]) contributors.push_back(buckets.row(b));

                const std::size_t span = 1 + static_cast<std::size_t>(rng() % hp.window);
                const std::size_t lo = i >= span ? i - span : 0;
                const std::size_t hi = std::min(line.size() - 1, i + span);
                for (std::size_t c = lo; c <= hi; ++c) {
                    if (c == i) continue;
                    const std::size_t context = line[c];
                    negatives.clear();
                    if (nwords > 1) {
                        for (std::uint32_t n = 0; n < hp.negatives; ++n) {
                            std::size_t neg;
                            do neg = sampler.draw(rng);
                            while (neg == context);
                            negatives.push_back(outputs.row(neg));
                        }
                    }
                    epoch_loss += skipgram_step<float>(contributors, outputs.row(context),
                                                       negatives, lr);
                    ++epoch_pairs;
                }
            }
        }
        if (log) {
            log->epoch_mean_loss.push_back(epoch_pairs ? epoch_loss / static_cast<double>(epoch_pairs) : 0.0);
            log->pairs += epoch_pairs;
        }
    }
    if (log) log->tokens_processed = processed;
    return model;
}

}  // namespace titl
