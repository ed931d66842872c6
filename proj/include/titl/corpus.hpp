#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace titl {

struct TokenizerConfig {
    bool lowercase = false;
    bool strip_punctuation = false;

    bool operator==(const TokenizerConfig&) const = default;
};

// A non-blank corpus line. id is its position among the non-blank lines.
struct Sentence {
    std::size_t id = 0;
    std::string text;
    std::vector<std::string> tokens;

    bool operator==(const Sentence&) const = default;
};

struct Corpus {
    std::vector<Sentence> sentences;
    std::size_t token_count = 0;
    std::string source_path;

    std::size_t size() const { return sentences.size(); }
    bool empty() const { return sentences.empty(); }
};

// Splits on Unicode whitespace. Apostrophes are never stripped: they are
// letters in many orthographies (ceese', he'ih).
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

// Builds a corpus from in-memory text, one sentence per line (LF or CRLF).
Corpus parse_corpus(std::string_view contents, const TokenizerConfig& config = {},
                    std::string source_path = {});

// Throws IoError if unreadable, EncodingError on invalid UTF-8.
Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& config = {});

}  // namespace titl
