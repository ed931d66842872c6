#pragma once

#include <filesystem>
#include <iosfwd>

#include "titl/embeddings.hpp"

namespace titl {

// Binary little-endian formats.
//
// Model: "TITL-EMB", u32 version, hyperparameters in declaration order
// (u32 except buckets/seed u64, lr0/subsample_t f64), u64 vocab count, per
// word a u32-length-prefixed UTF-8 string and u64 count, then the input word,
// input bucket and output matrices as row-major f32.
//
// Index: "TITL-IDX", u32 version, u32 dim, u64 entry count, per entry u64 id,
// u32-length-prefixed UTF-8 text, dim f32 values.
//
// Loading throws FormatError naming the field for bad magic, unsupported
// version, truncation, non-finite values or inconsistent dimensions.
inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint32_t kIndexFormatVersion = 1;

void save_model(const EmbeddingModel& model, std::ostream& out);
void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(std::istream& in);
EmbeddingModel load_model(const std::filesystem::path& path);

void save_index(const SentenceIndex& index, std::ostream& out);
void save_index(const SentenceIndex& index, const std::filesystem::path& path);
SentenceIndex load_index(std::istream& in);
SentenceIndex load_index(const std::filesystem::path& path);

}  // namespace titl
