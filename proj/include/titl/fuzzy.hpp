#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace titl {

struct FuzzyConfig {
    std::size_t suggestion_threshold = 2;  // inclusive
    std::size_t max_suggestions = 5;
};

// Edit distance over Unicode scalar values (insert, delete, substitute).
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// 1 - levenshtein / max(length); 1 when both are empty.
double normalized_similarity(std::string_view a, std::string_view b);
double normalized_similarity(std::u32string_view a, std::u32string_view b);

// Mean over query tokens of the best similarity against any sentence token.
// Throws ContractViolation if query_tokens is empty.
double fuzzy_sentence_score(std::span<const std::string> query_tokens,
                            std::span<const std::string> sentence_tokens);
double fuzzy_sentence_score(std::span<const std::u32string> query_tokens,
                            std::span<const std::u32string> sentence_tokens);

struct Suggestion {
    std::string word;
    std::size_t distance = 0;

    bool operator==(const Suggestion&) const = default;
};

// Vocabulary words within the threshold, nearest first, ties by word. An exact
// match is returned alone.
std::vector<Suggestion> suggest_corrections(std::string_view word,
                                            std::span<const std::string> vocabulary,
                                            const FuzzyConfig& config = {});

}  // namespace titl
