#include "titl/fuzzy.hpp"

#include <algorithm>
#include <numeric>

#include "titl/errors.hpp"
#include "titl/utf8.hpp"

namespace titl {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();

    // Single row over the shorter string.
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i + 1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t up = row[j + 1];
            const std::size_t sub = diag + (a[i] == b[j] ? 0 : 1);
            row[j + 1] = std::min({up + 1, row[j] + 1, sub});
            diag = up;
        }
    }
    return row.back();
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a == b) return 0;
    return levenshtein(std::u32string_view(utf8::decode(a)), std::u32string_view(utf8::decode(b)));
}

double normalized_similarity(std::u32string_view a, std::u32string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double normalized_similarity(std::string_view a, std::string_view b) {
    return normalized_similarity(std::u32string_view(utf8::decode(a)), std::u32string_view(utf8::decode(b)));
}

double fuzzy_sentence_score(std::span<const std::u32string> query_tokens,
                            std::span<const std::u32string> sentence_tokens) {
    if (query_tokens.empty()) throw ContractViolation("fuzzy_sentence_score: empty query");
    if (sentence_tokens.empty()) return 0.0;
    double total = 0.0;
    for (const auto& q : query_tokens) {
        double best = 0.0;
        for (const auto& s : sentence_tokens) {
            best = std::max(best, normalized_similarity(q, s));
            if (best == 1.0) break;
        }
        total += best;
    }
    return total / static_cast<double>(query_tokens.size());
}

double fuzzy_sentence_score(std::span<const std::string> query_tokens,
                            std::span<const std::string> sentence_tokens) {
    std::vector<std::u32string> q, s;
    for (const auto& t : query_tokens) q.push_back(utf8::decode(t));
    for (const auto& t : sentence_tokens) s.push_back(utf8::decode(t));
    return fuzzy_sentence_score(std::span<const std::u32string>(q), std::span<const std::u32string>(s));
}

std::vector<Suggestion> suggest_corrections(std::string_view word,
                                            std::span<const std::string> vocabulary,
                                            const FuzzyConfig& config) {
    if (config.max_suggestions < 1) throw ValidationError("max_suggestions must be at least 1");
    if (std::find(vocabulary.begin(), vocabulary.end(), word) != vocabulary.end())
        return {Suggestion{std::string(word), 0}};

    const std::u32string w = utf8::decode(word);
    std::vector<Suggestion> out;
    for (const auto& v : vocabulary) {
        const std::size_t d = levenshtein(std::u32string_view(w), std::u32string_view(utf8::decode(v)));
        if (d <= config.suggestion_threshold) out.push_back({v, d});
    }
    std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.word < b.word;
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() > config.max_suggestions) out.resize(config.max_suggestions);
    return out;
}

}  // namespace titl
