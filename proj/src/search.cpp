#include "titl/search.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "titl/fuzzy.hpp"
#include "titl/utf8.hpp"

namespace titl {

SearchMode SearchMode::hybrid(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must be in [0, 1]");
    return SearchMode(Kind::hybrid, alpha);
}

SearchMode SearchMode::parse(std::string_view name, double alpha) {
    if (name == "embedding") return embedding();
    if (name == "fuzzy") return fuzzy();
    if (name == "hybrid") return hybrid(alpha);
    throw ValidationError("unknown search mode '" + std::string(name) + "'");
}

std::string SearchMode::name() const {
    switch (kind_) {
        case Kind::embedding: return "embedding";
        case Kind::fuzzy: return "fuzzy";
        case Kind::hybrid: return "hybrid";
    }
    return "embedding";
}

bool Session::is_relevant(std::uint64_t id) const {
    return std::find(relevant.begin(), relevant.end(), id) != relevant.end();
}

ExportFormat parse_export_format(std::string_view name) {
    if (name == "txt") return ExportFormat::txt;
    if (name == "csv") return ExportFormat::csv;
    if (name == "json") return ExportFormat::json;
    throw ValidationError("unknown export format '" + std::string(name) + "'");
}

std::string_view content_type(ExportFormat format) {
    switch (format) {
        case ExportFormat::txt: return "text/plain; charset=utf-8";
        case ExportFormat::csv: return "text/csv; charset=utf-8";
        case ExportFormat::json: return "application/json";
    }
    return "application/octet-stream";
}

std::string_view file_extension(ExportFormat format) {
    switch (format) {
        case ExportFormat::txt: return "txt";
        case ExportFormat::csv: return "csv";
        case ExportFormat::json: return "json";
    }
    return "bin";
}

SearchEngine::SearchEngine(std::shared_ptr<const EmbeddingModel> model,
                           std::shared_ptr<const SentenceIndex> index, TokenizerConfig tokenizer)
    : model_(std::move(model)), index_(std::move(index)), tokenizer_(tokenizer),
      id_rng_(std::random_device{}()) {
    if (!model_ || !index_) throw ValidationError("search engine needs a model and an index");
    if (index_->dim != model_->dim())
        throw ValidationError("index dimension " + std::to_string(index_->dim) +
                              " does not match model dimension " + std::to_string(model_->dim()));
    entry_tokens_.reserve(index_->entries.size());
    for (const auto& e : index_->entries) {
        std::vector<std::u32string> toks;
        for (const auto& t : tokenize(e.text, tokenizer_)) toks.push_back(utf8::decode(t));
        entry_tokens_.push_back(std::move(toks));
    }
}

std::optional<std::size_t> SearchEngine::position_of(std::uint64_t sentence_id) const {
    const auto& entries = index_->entries;
    auto it = std::lower_bound(entries.begin(), entries.end(), sentence_id,
                               [](const IndexEntry& e, std::uint64_t id) { return e.sentence_id < id; });
    if (it == entries.end() || it->sentence_id != sentence_id) return std::nullopt;
    return static_cast<std::size_t>(it - entries.begin());
}

std::string SearchEngine::new_session_id() const {
    std::lock_guard lock(id_mutex_);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(++id_counter_));
    return buf;
}

Session SearchEngine::create_session(std::string_view query_text, SearchMode mode, std::size_t k) const {
    if (k < 1) throw ValidationError("k must be at least 1");
    Session s;
    s.query_tokens = tokenize(query_text, tokenizer_);
    if (s.query_tokens.empty()) throw ValidationError("query is empty");
    s.session_id = new_session_id();
    s.query_text = std::string(query_text);
    s.k = k;
    s.mode = mode;
    s.created_at = std::chrono::system_clock::now();
    if (mode.uses_vectors()) {
        const Vector v = sentence_vector(*model_, s.query_tokens);
        s.query_vector.assign(v.begin(), v.end());
    }
    return s;
}

namespace {

double score_entry(const Session& session, std::span<const std::u32string> query_tokens,
                   const IndexEntry& entry, std::span<const std::u32string> entry_tokens) {
    const auto cos = [&] {
        return cosine(std::span<const double>(session.query_vector), std::span<const float>(entry.vector));
    };
    switch (session.mode.kind()) {
        case SearchMode::Kind::embedding:
            return cos();
        case SearchMode::Kind::fuzzy:
            return fuzzy_sentence_score(query_tokens, entry_tokens);
        case SearchMode::Kind::hybrid: {
            const double a = session.mode.alpha();
            return a * (1.0 + cos()) / 2.0 + (1.0 - a) * fuzzy_sentence_score(query_tokens, entry_tokens);
        }
    }
    return 0.0;
}

std::vector<std::u32string> decode_all(const std::vector<std::string>& tokens) {
    std::vector<std::u32string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(utf8::decode(t));
    return out;
}

}  // namespace

double SearchEngine::score(const Session& session, std::size_t entry_position) const {
    if (entry_position >= index_->entries.size()) throw ContractViolation("score: entry position out of range");
    const auto q = decode_all(session.query_tokens);
    return score_entry(session, q, index_->entries[entry_position], entry_tokens_[entry_position]);
}

std::vector<SearchResult> SearchEngine::next_results(Session& session) const {
    if (session.batches_served > 0) update_query_vector(session);

    const auto q = decode_all(session.query_tokens);
    struct Candidate {
        double score;
        std::size_t pos;
    };
    std::vector<Candidate> pool;
    pool.reserve(index_->entries.size());
    for (std::size_t i = 0; i < index_->entries.size(); ++i) {
        const auto& e = index_->entries[i];
        if (session.shown.contains(e.sentence_id)) continue;
        pool.push_back({score_entry(session, q, e, entry_tokens_[i]), i});
    }
    // Positions follow ascending sentence id, so they break ties.
    const auto better = [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.pos < b.pos;
    };
    const std::size_t take = std::min(session.k, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take), pool.end(), better);

    std::vector<SearchResult> batch;
    batch.reserve(take);
    for (std::size_t r = 0; r < take; ++r) {
        const auto& e = index_->entries[pool[r].pos];
        batch.push_back({e.sentence_id, e.text, pool[r].score, r + 1});
        session.shown.insert(e.sentence_id);
    }
    ++session.batches_served;
    return batch;
}

void SearchEngine::record_feedback(Session& session, std::uint64_t sentence_id, bool relevant) const {
    if (!session.shown.contains(sentence_id))
        throw ValidationError("sentence " + std::to_string(sentence_id) + " was not shown in this session");
    auto it = std::find(session.relevant.begin(), session.relevant.end(), sentence_id);
    if (relevant) {
        session.irrelevant.erase(sentence_id);
        if (it == session.relevant.end()) session.relevant.push_back(sentence_id);
    } else {
        if (it != session.relevant.end()) session.relevant.erase(it);
        session.irrelevant.insert(sentence_id);
    }
}

const std::vector<double>& SearchEngine::update_query_vector(Session& session) const {
    if (!session.mode.uses_vectors() || session.relevant.empty()) return session.query_vector;
    std::vector<double> mean(index_->dim, 0.0);
    std::size_t n = 0;
    for (auto id : session.relevant) {
        const auto pos = position_of(id);
        if (!pos) continue;
        const auto& v = index_->entries[*pos].vector;
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
        ++n;
    }
    if (n == 0) return session.query_vector;
    for (auto& x : mean) x /= static_cast<double>(n);
    session.query_vector = std::move(mean);
    return session.query_vector;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string SearchEngine::export_document(const Session& session, ExportFormat format) const {
    std::vector<const IndexEntry*> rows;
    for (auto id : session.relevant)
        if (auto pos = position_of(id)) rows.push_back(&index_->entries[*pos]);

    std::string out;
    switch (format) {
        case ExportFormat::txt:
            for (const auto* e : rows) {
                out += e->text;
                out += '\n';
            }
            break;
        case ExportFormat::csv:
            out = "sentence_id,text\r\n";
            for (const auto* e : rows) {
                out += std::to_string(e->sentence_id);
                out += ',';
                out += csv_field(e->text);
                out += "\r\n";
            }
            break;
        case ExportFormat::json: {
            auto arr = nlohmann::json::array();
            for (const auto* e : rows) arr.push_back({{"id", e->sentence_id}, {"text", e->text}});
            out = arr.dump();
            break;
        }
    }
    return out;
}

}  // namespace titl
