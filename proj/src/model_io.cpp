#include "titl/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "titl/utf8.hpp"

namespace titl {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

constexpr char kModelMagic[8] = {'T', 'I', 'T', 'L', '-', 'E', 'M', 'B'};
constexpr char kIndexMagic[8] = {'T', 'I', 'T', 'L', '-', 'I', 'D', 'X'};

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <typename T>
    void put(T v) {
        v = to_little(v);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

    void string(const std::string& s) {
        put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    void floats(std::span<const float> xs) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(xs.data(), xs.size() * sizeof(float));
        } else {
            for (float x : xs) put(x);
        }
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    template <typename T>
    T get(const std::string& field) {
        T v;
        read(&v, sizeof(T), field);
        return to_little(v);
    }

    void read(void* p, std::size_t n, const std::string& field) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(field, "unexpected end of file");
    }

    std::string string(const std::string& field) {
        const auto n = get<std::uint32_t>(field + ".length");
        std::string s;
        // Read in chunks so a corrupt length cannot force a huge allocation.
        constexpr std::size_t kChunk = 1 << 16;
        std::size_t left = n;
        while (left > 0) {
            const std::size_t take = std::min(left, kChunk);
            const std::size_t at = s.size();
            s.resize(at + take);
            read(s.data() + at, take, field);
            left -= take;
        }
        if (auto bad = utf8::first_invalid(s))
            throw FormatError(field, "invalid UTF-8 at byte " + std::to_string(*bad));
        return s;
    }

    void floats(std::span<float> xs, const std::string& field) {
        read(xs.data(), xs.size() * sizeof(float), field);
        for (float& x : xs) {
            x = to_little(x);
            if (!std::isfinite(x)) throw FormatError(field, "non-finite value");
        }
    }

    void magic(const char (&expected)[8]) {
        char m[8];
        read(m, 8, "magic");
        if (std::memcmp(m, expected, 8) != 0) throw FormatError("magic", "not a " + std::string(expected, 8) + " file");
    }

    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) throw FormatError("trailer", "unexpected data after end of file");
    }

private:
    std::istream& in_;
};

void check_stream(std::ostream& out, const std::string& what) {
    if (!out) throw IoError("error writing " + what);
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

void save_model(const EmbeddingModel& model, std::ostream& out) {
    Writer w(out);
    const auto& hp = model.hyperparams();
    w.bytes(kModelMagic, 8);
    w.put(kModelFormatVersion);
    w.put(hp.dim);
    w.put(hp.window);
    w.put(hp.negatives);
    w.put(hp.epochs);
    w.put(hp.lr0);
    w.put(hp.ngram_min);
    w.put(hp.ngram_max);
    w.put(hp.buckets);
    w.put(hp.min_count);
    w.put(hp.subsample_t);
    w.put(hp.seed);
    w.put<std::uint64_t>(model.vocab().size());
    for (const auto& v : model.vocab()) {
        w.string(v.word);
        w.put(v.count);
    }
    w.floats(model.input_word_vectors().data());
    w.floats(model.input_bucket_vectors().data());
    w.floats(model.output_vectors().data());
    check_stream(out, "model");
}

void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
    auto out = open_out(path);
    save_model(model, out);
    out.flush();
    check_stream(out, path.string());
}

EmbeddingModel load_model(std::istream& in) {
    Reader r(in);
    r.magic(kModelMagic);
    const auto version = r.get<std::uint32_t>("version");
    if (version != kModelFormatVersion)
        throw FormatError("version", "unsupported model format version " + std::to_string(version));

    Hyperparams hp;
    hp.dim = r.get<std::uint32_t>("hyperparams.dim");
    hp.window = r.get<std::uint32_t>("hyperparams.window");
    hp.negatives = r.get<std::uint32_t>("hyperparams.negatives");
    hp.epochs = r.get<std::uint32_t>("hyperparams.epochs");
    hp.lr0 = r.get<double>("hyperparams.lr0");
    hp.ngram_min = r.get<std::uint32_t>("hyperparams.ngram_min");
    hp.ngram_max = r.get<std::uint32_t>("hyperparams.ngram_max");
    hp.buckets = r.get<std::uint64_t>("hyperparams.buckets");
    hp.min_count = r.get<std::uint32_t>("hyperparams.min_count");
    hp.subsample_t = r.get<double>("hyperparams.subsample_t");
    hp.seed = r.get<std::uint64_t>("hyperparams.seed");
    try {
        hp.validate();
    } catch (const ValidationError& e) {
        throw FormatError("hyperparams", e.what());
    }
    // Guard against allocating absurd matrices from a corrupt header.
    constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 34;
    if (hp.buckets * hp.dim > kMaxCells) throw FormatError("hyperparams.buckets", "matrix too large");

    const auto nwords = r.get<std::uint64_t>("vocab.count");
    if (nwords * hp.dim > kMaxCells) throw FormatError("vocab.count", "vocabulary too large");
    std::vector<VocabEntry> vocab;
    for (std::uint64_t i = 0; i < nwords; ++i) {
        const std::string field = "vocab[" + std::to_string(i) + "]";
        VocabEntry v;
        v.word = r.string(field + ".word");
        v.count = r.get<std::uint64_t>(field + ".count");
        vocab.push_back(std::move(v));
    }

    EmbeddingModel model(hp, std::move(vocab));
    if (model.vocab().size() != nwords) throw FormatError("vocab", "duplicate word");
    r.floats(model.input_word_vectors().data(), "input_word_vectors");
    r.floats(model.input_bucket_vectors().data(), "input_bucket_vectors");
    r.floats(model.output_vectors().data(), "output_vectors");
    r.expect_end();
    return model;
}

EmbeddingModel load_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_model(in);
}

void save_index(const SentenceIndex& index, std::ostream& out) {
    Writer w(out);
    w.bytes(kIndexMagic, 8);
    w.put(kIndexFormatVersion);
    w.put(index.dim);
    w.put<std::uint64_t>(index.entries.size());
    for (const auto& e : index.entries) {
        if (e.vector.size() != index.dim)
            throw FormatError("entries.vector", "entry " + std::to_string(e.sentence_id) + " has " +
                                                    std::to_string(e.vector.size()) + " values, dim is " +
                                                    std::to_string(index.dim));
        w.put(e.sentence_id);
        w.string(e.text);
        w.floats(e.vector);
    }
    check_stream(out, "index");
}

void save_index(const SentenceIndex& index, const std::filesystem::path& path) {
    auto out = open_out(path);
    save_index(index, out);
    out.flush();
    check_stream(out, path.string());
}

SentenceIndex load_index(std::istream& in) {
    Reader r(in);
    r.magic(kIndexMagic);
    const auto version = r.get<std::uint32_t>("version");
    if (version != kIndexFormatVersion)
        throw FormatError("version", "unsupported index format version " + std::to_string(version));
    SentenceIndex index;
    index.dim = r.get<std::uint32_t>("dim");
    if (index.dim == 0) throw FormatError("dim", "must be positive");
    const auto count = r.get<std::uint64_t>("entry_count");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string field = "entries[" + std::to_string(i) + "]";
        IndexEntry e;
        e.sentence_id = r.get<std::uint64_t>(field + ".id");
        if (!index.entries.empty() && e.sentence_id <= index.entries.back().sentence_id)
            throw FormatError(field + ".id", "ids must be strictly increasing");
        e.text = r.string(field + ".text");
        e.vector.resize(index.dim);
        r.floats(e.vector, field + ".vector");
        index.entries.push_back(std::move(e));
    }
    r.expect_end();
    return index;
}

SentenceIndex load_index(const std::filesystem::path& path) {
    auto in = open_in(path);
    return load_index(in);
}

}  // namespace titl
