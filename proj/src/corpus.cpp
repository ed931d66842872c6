#include "titl/corpus.hpp"

#include <fstream>
#include <sstream>

#include "titl/errors.hpp"
#include "titl/utf8.hpp"

namespace titl {
namespace {

bool is_strippable(char32_t cp) {
    switch (cp) {
        case U'.': case U',': case U';': case U':': case U'!': case U'?':
        case U'"': case U'(': case U')': case U'[': case U']':
            return true;
        default:
            return false;
    }
}

void flush_token(std::u32string& cur, const TokenizerConfig& config,
                 std::vector<std::string>& out) {
    std::u32string_view tok = cur;
    if (config.strip_punctuation) {
        while (!tok.empty() && is_strippable(tok.front())) tok.remove_prefix(1);
        while (!tok.empty() && is_strippable(tok.back())) tok.remove_suffix(1);
    }
    if (!tok.empty()) {
        std::string encoded;
        encoded.reserve(tok.size());
        for (char32_t cp : tok) utf8::append(encoded, config.lowercase ? utf8::to_lower(cp) : cp);
        out.push_back(std::move(encoded));
    }
    cur.clear();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
    std::vector<std::string> tokens;
    std::u32string cur;
    for (char32_t cp : utf8::decode(text)) {
        if (utf8::is_space(cp)) {
            if (!cur.empty()) flush_token(cur, config, tokens);
        } else {
            cur.push_back(cp);
        }
    }
    if (!cur.empty()) flush_token(cur, config, tokens);
    return tokens;
}

Corpus parse_corpus(std::string_view contents, const TokenizerConfig& config,
                    std::string source_path) {
    if (auto bad = utf8::first_invalid(contents))
        throw EncodingError("invalid UTF-8 at byte offset " + std::to_string(*bad) +
                                (source_path.empty() ? "" : " in " + source_path),
                            *bad);

    Corpus corpus;
    corpus.source_path = std::move(source_path);
    std::size_t start = 0;
    while (start < contents.size()) {
        std::size_t end = contents.find('\n', start);
        if (end == std::string_view::npos) end = contents.size();
        std::string_view line = contents.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = end + 1;

        auto tokens = tokenize(line, config);
        if (tokens.empty()) {
            // Whitespace-only lines carry nothing; lines that only become empty
            // after punctuation stripping are still real sentences.
            bool blank = true;
            for (char32_t cp : utf8::decode(line))
                if (!utf8::is_space(cp)) { blank = false; break; }
            if (blank) continue;
        }
        corpus.token_count += tokens.size();
        corpus.sentences.push_back(
            Sentence{corpus.sentences.size(), std::string(line), std::move(tokens)});
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading corpus file " + path.string());
    return parse_corpus(buf.str(), config, path.string());
}

}  // namespace titl
