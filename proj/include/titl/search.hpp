#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "titl/corpus.hpp"
#include "titl/embeddings.hpp"

namespace titl {

class SearchMode {
public:
    enum class Kind { embedding, fuzzy, hybrid };

    SearchMode() = default;
    static SearchMode embedding() { return SearchMode(Kind::embedding, 0.5); }
    static SearchMode fuzzy() { return SearchMode(Kind::fuzzy, 0.5); }
    // Throws ValidationError unless alpha is in [0, 1].
    static SearchMode hybrid(double alpha = 0.5);
    // Accepts "embedding", "fuzzy" or "hybrid"; throws ValidationError otherwise.
    static SearchMode parse(std::string_view name, double alpha = 0.5);

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    bool uses_vectors() const { return kind_ != Kind::fuzzy; }
    std::string name() const;

    bool operator==(const SearchMode&) const = default;

private:
    SearchMode(Kind kind, double alpha) : kind_(kind), alpha_(alpha) {}

    Kind kind_ = Kind::embedding;
    double alpha_ = 0.5;
};

// One teacher's search state.
// Invariants: relevant and irrelevant are disjoint subsets of shown; k >= 1.
struct Session {
    std::string session_id;
    std::string query_text;
    std::vector<std::string> query_tokens;
    std::vector<double> query_vector;  // empty in fuzzy mode
    std::size_t k = 5;
    SearchMode mode;
    std::vector<std::uint64_t> relevant;  // in order of marking
    std::set<std::uint64_t> irrelevant;
    std::set<std::uint64_t> shown;
    std::uint64_t batches_served = 0;
    std::chrono::system_clock::time_point created_at;

    bool is_relevant(std::uint64_t id) const;
};

struct SearchResult {
    std::uint64_t sentence_id = 0;
    std::string text;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based within its batch

    bool operator==(const SearchResult&) const = default;
};

enum class ExportFormat { txt, csv, json };

// Throws ValidationError for anything but "txt", "csv" or "json".
ExportFormat parse_export_format(std::string_view name);
std::string_view content_type(ExportFormat format);
std::string_view file_extension(ExportFormat format);

// Relevance-feedback retrieval over a shared, read-only index and model.
// The engine itself is thread-safe; a given Session must not be used by two
// threads at once.
class SearchEngine {
public:
    // Throws ValidationError when the index and model dimensions differ.
    SearchEngine(std::shared_ptr<const EmbeddingModel> model,
                 std::shared_ptr<const SentenceIndex> index, TokenizerConfig tokenizer = {});

    const EmbeddingModel& model() const { return *model_; }
    const SentenceIndex& index() const { return *index_; }
    const TokenizerConfig& tokenizer_config() const { return tokenizer_; }

    // Position of a sentence id in the index.
    std::optional<std::size_t> position_of(std::uint64_t sentence_id) const;

    // Throws ValidationError for a query with no tokens or k < 1.
    Session create_session(std::string_view query_text, SearchMode mode = {}, std::size_t k = 5) const;

    double score(const Session& session, std::size_t entry_position) const;

    // Top k unshown sentences by score (ties by ascending id); marks them shown.
    // From the second batch on, the query vector is refreshed from feedback first.
    std::vector<SearchResult> next_results(Session& session) const;

    // Throws ValidationError if the sentence was never shown in this session.
    void record_feedback(Session& session, std::uint64_t sentence_id, bool relevant) const;

    // Replaces the query vector by the mean of the relevant sentences' vectors;
    // leaves it unchanged when nothing is relevant or the mode is fuzzy.
    const std::vector<double>& update_query_vector(Session& session) const;

    std::string export_document(const Session& session, ExportFormat format) const;

private:
    std::string new_session_id() const;

    std::shared_ptr<const EmbeddingModel> model_;
    std::shared_ptr<const SentenceIndex> index_;
    TokenizerConfig tokenizer_;
    std::vector<std::vector<std::u32string>> entry_tokens_;

    mutable std::mutex id_mutex_;
    mutable std::mt19937_64 id_rng_;
    mutable std::uint64_t id_counter_ = 0;
};

}  // namespace titl
