// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "service_fixture.hpp"
#include "titl/fuzzy.hpp"
#include "titl/model_io.hpp"
#include "titl/search.hpp"
#include "titl/skipgram.hpp"
#include "toy.hpp"

using namespace titl;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Random lowercase word of 4-7 letters; class membership is not visible in spelling.
std::string random_word(std::mt19937_64& rng, std::set<std::string>& used) {
    static const std::string letters = "abcehiknostuwy3'";
    for (;;) {
        std::string w;
        const std::size_t n = 4 + rng() % 4;
        for (std::size_t i = 0; i < n; ++i) w += letters[rng() % letters.size()];
        if (used.insert(w).second) return w;
    }
}

double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

Outcome gradient_correctness() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20200511);
    std::normal_distribution<double> g(0.0, 0.7);
    constexpr double eps = 1e-5, tol = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + rng() % 16, nneg = rng() % 6;
        const std::size_t ncontrib = 1 + rng() % 4;
        auto rnd = [&] {
            std::vector<double> v(dim);
            for (auto& x : v) x = g(rng);
            return v;
        };
        std::vector<std::vector<double>> inputs;
        for (std::size_t i = 0; i < ncontrib; ++i) inputs.push_back(rnd());
        const auto uc = rnd();
        std::vector<std::vector<double>> negs;
        for (std::size_t i = 0; i < nneg; ++i) negs.push_back(rnd());

        std::vector<double> h(dim, 0.0);
        for (const auto& v : inputs)
            for (std::size_t d = 0; d < dim; ++d) h[d] += v[d] / static_cast<double>(ncontrib);

        auto negs_ref = negs;
        std::vector<std::span<double>> ref_spans(negs_ref.begin(), negs_ref.end());
        const auto grad = skipgram_gradient<double>(h, uc, std::span<const std::span<double>>(ref_spans));

        // Analytic gradients read off the parameter change of one step: delta = -lr * grad.
        const double lr = 1e-3;
        auto in2 = inputs;
        auto uc2 = uc;
        auto negs2 = negs;
        std::vector<std::span<double>> contributors(in2.begin(), in2.end());
        std::vector<std::span<double>> neg_spans(negs2.begin(), negs2.end());
        skipgram_step<double>(contributors, uc2, neg_spans, lr);

        auto fd = [&](auto loss_at) {
            std::vector<double> out(dim);
            for (std::size_t d = 0; d < dim; ++d) out[d] = (loss_at(d, eps) - loss_at(d, -eps)) / (2 * eps);
            return out;
        };
        // dL/dh via the step's change to the first contributor (scaled by the contributor count).
        std::vector<double> an_h(dim), an_uc(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            an_h[d] = (inputs[0][d] - in2[0][d]) / lr * static_cast<double>(ncontrib);
            an_uc[d] = (uc[d] - uc2[d]) / lr;
        }
        const auto fd_h = fd([&](std::size_t d, double e) {
            auto hh = h;
            hh[d] += e;
            return oracle::skipgram_loss(hh, uc, negs);
        });
        const auto fd_uc = fd([&](std::size_t d, double e) {
            auto u = uc;
            u[d] += e;
            return oracle::skipgram_loss(h, u, negs);
        });
        std::vector<double> g_uc(dim);
        for (std::size_t d = 0; d < dim; ++d) g_uc[d] = grad.context_coeff * h[d];
        worst = std::max({worst, rel_error(grad.d_hidden, fd_h), rel_error(g_uc, fd_uc)});
        // The step must apply exactly that gradient.
        if (rel_error(an_h, grad.d_hidden) > 1e-6 || rel_error(an_uc, g_uc) > 1e-6)
            return {false, "step update disagrees with its gradient in trial " + std::to_string(trial) + fmt(" (%.2e, %.2e)", rel_error(an_h, grad.d_hidden), rel_error(an_uc, g_uc))};
        for (std::size_t i = 0; i < nneg; ++i) {
            const auto fd_un = fd([&](std::size_t d, double e) {
                auto p = negs;
                p[i][d] += e;
                return oracle::skipgram_loss(h, uc, p);
            });
            std::vector<double> g_un(dim);
            for (std::size_t d = 0; d < dim; ++d) g_un[d] = grad.negative_coeffs[i] * h[d];
            worst = std::max(worst, rel_error(g_un, fd_un));
        }
    }
    const double secs = seconds_since(start);
    return {worst < tol && secs < 5.0, fmt("max rel error %.2e (tol 1e-4), %.2fs (limit 5s)", worst, secs)};
}

Outcome distributional_property() {
    const auto start = Clock::now();
    std::mt19937_64 rng(77);
    std::set<std::string> used;
    auto words = [&](std::size_t n) {
        std::vector<std::string> w;
        for (std::size_t i = 0; i < n; ++i) w.push_back(random_word(rng, used));
        return w;
    };
    // Each sentence draws only from one class, so the classes never share a context.
    const auto class_a = words(20), class_b = words(20);
    std::string text;
    std::size_t tokens = 0;
    while (tokens < 20000) {
        const auto& cls = rng() % 2 == 0 ? class_a : class_b;
        for (int i = 0; i < 10; ++i) text += (i ? " " : "") + cls[rng() % cls.size()];
        text += "\n";
        tokens += 10;
    }
    const Corpus corpus = parse_corpus(text);
    Hyperparams hp;  // defaults
    hp.seed = 2020;
    const auto model = train(corpus, hp);

    std::vector<Vector> va, vb;
    for (const auto& w : class_a) va.push_back(word_vector(model, w));
    for (const auto& w : class_b) vb.push_back(word_vector(model, w));
    double intra = 0, inter = 0;
    std::size_t n_intra = 0, n_inter = 0;
    for (const auto* cls : {&va, &vb})
        for (std::size_t i = 0; i < cls->size(); ++i)
            for (std::size_t j = i + 1; j < cls->size(); ++j, ++n_intra) intra += cosine((*cls)[i], (*cls)[j]);
    for (const auto& x : va)
        for (const auto& y : vb) inter += cosine(x, y), ++n_inter;
    intra /= static_cast<double>(n_intra);
    inter /= static_cast<double>(n_inter);
    const double secs = seconds_since(start);
    return {corpus.token_count == 20000 && intra > inter && secs < 60.0,
            fmt("%.0f tokens, intra %.4f > inter %.4f, ", static_cast<double>(corpus.token_count), intra, inter) +
                fmt("%.1fs (limit 60s)", secs)};
}

// Compares two files chunk by chunk.
bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
    if (std::filesystem::file_size(a) != std::filesystem::file_size(b)) return false;
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::vector<char> ba(1 << 20), bb(1 << 20);
    while (fa && fb) {
        fa.read(ba.data(), static_cast<std::streamsize>(ba.size()));
        fb.read(bb.data(), static_cast<std::streamsize>(bb.size()));
        if (fa.gcount() != fb.gcount() || !std::equal(ba.begin(), ba.begin() + fa.gcount(), bb.begin())) return false;
    }
    return true;
}

Outcome training_scale() {
    // Synthetic corpus with a Zipfian vocabulary built from Arapaho-like syllables.
    std::mt19937_64 rng(100000);
    const auto vocab = toy::syllable_words(6000, 31);
    std::vector<double> weights;
    for (std::size_t r = 1; r <= vocab.size(); ++r) weights.push_back(1.0 / static_cast<double>(r));
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::string text;
    std::size_t tokens = 0;
    while (tokens < 100000) {
        const std::size_t len = std::min<std::size_t>(5 + rng() % 11, 100000 - tokens);
        for (std::size_t i = 0; i < len; ++i) text += (i ? " " : "") + vocab[pick(rng)];
        text += "\n";
        tokens += len;
    }
    const Corpus corpus = parse_corpus(text);

    oracle::TempDir dir;
    Hyperparams hp;
    hp.seed = 314159;
    double worst = 0;
    for (const char* name : {"run1.bin", "run2.bin"}) {
        const auto start = Clock::now();
        const auto model = train(corpus, hp);
        worst = std::max(worst, seconds_since(start));
        save_model(model, dir / name);
    }
    const bool identical = same_bytes(dir / "run1.bin", dir / "run2.bin");
    return {corpus.token_count == 100000 && identical && worst < 600.0,
            fmt("%.0f tokens, slowest run %.1fs (limit 600s), ", static_cast<double>(corpus.token_count), worst) +
                (identical ? "model files byte-identical" : "model files DIFFER")};
}

Outcome retrieval_oracle() {
    const auto vocab = toy::syllable_words(300, 41);
    const std::uint32_t dim = 16;
    auto model = toy::random_model(vocab, dim, 42);
    auto idx = toy::random_index(1000, dim, vocab, 43);
    SearchEngine engine(model, idx);
    std::vector<oracle::Candidate> all;
    for (const auto& e : idx->entries) all.push_back({e.sentence_id, e.text, e.vector, tokenize(e.text)});

    std::mt19937_64 rng(44);
    std::size_t batches = 0;
    for (int session = 0; session < 50; ++session) {
        for (int m = 0; m < 3; ++m) {
            const auto mode = m == 0 ? SearchMode::embedding() : m == 1 ? SearchMode::fuzzy() : SearchMode::hybrid(0.1 * static_cast<double>(rng() % 11));
            const auto omode = m == 0 ? oracle::Mode::embedding : m == 1 ? oracle::Mode::fuzzy : oracle::Mode::hybrid;
            std::string query;
            for (std::size_t t = 0; t < 1 + rng() % 4; ++t) query += (t ? " " : "") + vocab[rng() % vocab.size()];
            auto s = engine.create_session(query, mode, 1 + rng() % 10);
            std::set<std::uint64_t> shown;
            std::vector<std::uint64_t> relevant;
            std::vector<double> qvec = s.query_vector;
            for (int round = 0; round < 6; ++round) {  // first batch + 5 feedback rounds
                if (round > 0 && mode.uses_vectors() && !relevant.empty()) {
                    qvec.assign(dim, 0.0);
                    for (auto id : relevant)
                        for (std::size_t d = 0; d < dim; ++d) qvec[d] += idx->entries[id].vector[d];
                    for (auto& x : qvec) x /= static_cast<double>(relevant.size());
                }
                const auto expect = oracle::top_k(all, shown, omode, mode.alpha(), qvec, s.query_tokens, s.k);
                const auto batch = engine.next_results(s);
                std::vector<std::uint64_t> got;
                for (const auto& r : batch) got.push_back(r.sentence_id);
                ++batches;
                if (got != expect)
                    return {false, "mismatch in session " + std::to_string(session) + " mode " + mode.name() +
                                       " round " + std::to_string(round)};
                for (auto id : got) {
                    shown.insert(id);
                    const auto j = rng() % 3;
                    if (j == 0) {
                        engine.record_feedback(s, id, true);
                        relevant.push_back(id);
                    } else if (j == 1) {
                        engine.record_feedback(s, id, false);
                    }
                }
            }
        }
    }
    return {true, std::to_string(batches) + " batches over 50 sessions x 3 modes equal the brute-force oracle"};
}

Outcome feedback_arithmetic() {
    const auto vocab = toy::syllable_words(50, 51);
    auto idx = toy::random_index(500, 32, vocab, 52);
    SearchEngine engine(toy::random_model(vocab, 32, 53), idx);
    std::mt19937_64 rng(54);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        auto s = engine.create_session(vocab[rng() % vocab.size()], SearchMode::embedding(), 500);
        engine.next_results(s);
        std::set<std::uint64_t> rel;
        for (int i = 0; i < 1 + static_cast<int>(rng() % 60); ++i) {
            const auto id = rng() % 500;
            engine.record_feedback(s, id, true);
            rel.insert(id);
        }
        // Some relevant marks are later overridden.
        for (int i = 0; i < static_cast<int>(rng() % 5); ++i) {
            const auto id = rng() % 500;
            engine.record_feedback(s, id, false);
            rel.erase(id);
        }
        if (rel.empty()) continue;
        const auto q = engine.update_query_vector(s);
        for (std::size_t d = 0; d < 32; ++d) {
            double m = 0;
            for (auto id : rel) m += static_cast<double>(idx->entries[id].vector[d]);
            m /= static_cast<double>(rel.size());
            worst = std::max(worst, std::abs(q[d] - m));
        }
    }
    return {worst <= 1e-9, fmt("max componentwise deviation %.3e (tol 1e-9)", worst)};
}

Outcome levenshtein_oracle() {
    std::mt19937_64 rng(61);
    for (int i = 0; i < 1000; ++i) {
        const auto a = oracle::random_unicode(rng, 30), b = oracle::random_unicode(rng, 30),
                   c = oracle::random_unicode(rng, 30);
        const auto sa = oracle::to_utf8(a), sb = oracle::to_utf8(b), sc = oracle::to_utf8(c);
        const auto ab = levenshtein(sa, sb), ba = levenshtein(sb, sa), ac = levenshtein(sa, sc),
                   bc = levenshtein(sb, sc);
        if (ab != oracle::levenshtein(a, b)) return {false, "disagrees with DP oracle on pair " + std::to_string(i)};
        if (ab != ba) return {false, "asymmetric on pair " + std::to_string(i)};
        if ((ab == 0) != (a == b) || levenshtein(sa, sa) != 0) return {false, "identity axiom fails on pair " + std::to_string(i)};
        if (ac > ab + bc) return {false, "triangle inequality fails on triple " + std::to_string(i)};
    }
    return {true, "1000 random Unicode pairs (lengths 0-30) match the full-matrix oracle; metric axioms hold"};
}

Outcome no_repeat() {
    const auto vocab = toy::syllable_words(40, 71);
    std::mt19937_64 rng(72);
    std::size_t sessions = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 1 + rng() % 120;
        auto idx = toy::random_index(n, 8, vocab, rng());
        SearchEngine engine(toy::random_model(vocab, 8, rng()), idx);
        const auto mode = std::array{SearchMode::embedding(), SearchMode::fuzzy(), SearchMode::hybrid()}[trial % 3];
        auto s = engine.create_session(vocab[rng() % vocab.size()], mode, 1 + rng() % 9);
        std::vector<std::size_t> seen(n, 0);
        for (;;) {
            const auto batch = engine.next_results(s);
            if (batch.empty()) break;
            for (const auto& r : batch) {
                ++seen[r.sentence_id];
                const auto j = rng() % 3;
                if (j < 2) engine.record_feedback(s, r.sentence_id, j == 0);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (seen[i] != 1) return {false, "sentence " + std::to_string(i) + " seen " + std::to_string(seen[i]) + " times"};
        ++sessions;
    }
    return {true, std::to_string(sessions) + " exhaustive sessions enumerated every sentence exactly once"};
}

Outcome end_to_end_http() {
    const std::string query = "ceese' he'ihneestoyoohobee hinii3ebio";
    const std::vector<std::string> lines{
        "ceese' hookuhu'eeno he'ihce'ciiciinen",
        "hookuhu'eeno nih'iine'etiit ceese'",
        query,
        "he'ihneestoyoohobee neniisih'i",
        "hinii3ebio nih'ii3eihi he'ih'ii",
        "wohei nih'oo3ousei",
        "he'ihce'ciiciinen hookuhu'eeno",
        "ceese' nih'iine'etiit",
        "nih'eeneisih'i hinii3ebio",
        "he'ihbii3ihi ceese' nih'oo3ou",
        "hiisiini nih'iisi he'ihnooxo",
        "neniisih'i hookuhu'eeno wohei",
    };
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    const Corpus corpus = parse_corpus(text);
    Hyperparams hp;
    hp.dim = 24;
    hp.buckets = 20000;
    hp.subsample_t = 0;
    hp.seed = 5;
    auto model = std::make_shared<EmbeddingModel>(train(corpus, hp));
    auto index = std::make_shared<SentenceIndex>(build_index(*model, corpus));
    auto engine = std::make_shared<SearchEngine>(model, index);

    LiveService live(engine);
    auto cli = live.client();
    using nlohmann::json;

    // Steps 1-2: enter the query, receive the first batch.
    auto created = cli.Post("/api/sessions", json{{"query", query}, {"k", 4}}.dump(), "application/json");
    if (!created || created->status != 201) return {false, "session creation failed"};
    const auto cbody = json::parse(created->body);
    const std::string id = cbody["session_id"];
    std::vector<std::uint64_t> first;
    for (const auto& r : cbody["results"]) first.push_back(r["id"]);
    if (first.empty() || first[0] != 2) return {false, "query sentence is not echoed first"};

    // Step 3: judge the batch.
    json judgments = json::array();
    std::vector<std::pair<std::uint64_t, bool>> script;
    for (std::size_t i = 0; i < first.size(); ++i) script.emplace_back(first[i], i % 2 == 1);
    for (const auto& [sid, rel] : script) judgments.push_back({{"sentence_id", sid}, {"relevant", rel}});
    auto fb = cli.Post("/api/sessions/" + id + "/feedback", json{{"judgments", judgments}}.dump(), "application/json");
    if (!fb || fb->status != 200) return {false, "feedback failed"};

    // Step 4: more, judge again.
    auto more = cli.Post("/api/sessions/" + id + "/more", "{}", "application/json");
    if (!more || more->status != 200) return {false, "more failed"};
    std::vector<std::uint64_t> second;
    const auto mbody = json::parse(more->body);
    for (const auto& r : mbody["results"]) second.push_back(r["id"]);
    json j2 = json::array();
    std::vector<std::pair<std::uint64_t, bool>> script2;
    for (std::size_t i = 0; i < second.size(); ++i) script2.emplace_back(second[i], i % 2 == 0);
    for (const auto& [sid, rel] : script2) j2.push_back({{"sentence_id", sid}, {"relevant", rel}});
    cli.Post("/api/sessions/" + id + "/feedback", json{{"judgments", j2}}.dump(), "application/json");

    // Same operations directly on the engine.
    auto s = engine->create_session(query, SearchMode::embedding(), 4);
    std::vector<std::uint64_t> direct_first, direct_second;
    for (const auto& r : engine->next_results(s)) direct_first.push_back(r.sentence_id);
    for (const auto& [sid, rel] : script) engine->record_feedback(s, sid, rel);
    for (const auto& r : engine->next_results(s)) direct_second.push_back(r.sentence_id);
    for (const auto& [sid, rel] : script2) engine->record_feedback(s, sid, rel);
    if (direct_first != first || direct_second != second) {
        auto join = [](const std::vector<std::uint64_t>& v) {
            std::string o;
            for (auto x : v) o += std::to_string(x) + " ";
            return o;
        };
        return {false, "HTTP batches differ from direct engine: http [" + join(first) + "| " + join(second) +
                           "] direct [" + join(direct_first) + "| " + join(direct_second) + "]"};
    }

    // Step 5: export in every format.
    for (auto format : {ExportFormat::txt, ExportFormat::csv, ExportFormat::json}) {
        auto r = cli.Get("/api/sessions/" + id + "/export?format=" + std::string(file_extension(format)));
        if (!r || r->status != 200) return {false, "export request failed"};
        if (r->body != engine->export_document(s, format))
            return {false, std::string(file_extension(format)) + " export differs from the direct engine"};
    }
    return {true, "create (echo ranked first) -> feedback -> more -> export; exports byte-identical (" +
                      std::to_string(s.relevant.size()) + " relevant)"};
}

Outcome round_trip_persistence() {
    const Corpus corpus = parse_corpus(
        "ceese' he'ihneestoyoohobee hinii3ebio\nceese' hookuhu'eeno he'ihce'ciiciinen\nwohei\n");
    Hyperparams hp;
    hp.dim = 10;
    hp.buckets = 3000;
    const auto model = train(corpus, hp);
    const auto index = build_index(model, corpus);

    oracle::TempDir dir;
    save_model(model, dir / "m.bin");
    save_index(index, dir / "i.bin");
    if (!(load_model(dir / "m.bin") == model)) return {false, "model round trip not lossless"};
    if (!(load_index(dir / "i.bin") == index)) return {false, "index round trip not lossless"};

    const auto mbytes = oracle::read_file(dir / "m.bin");
    const auto ibytes = oracle::read_file(dir / "i.bin");
    std::size_t rejected = 0, cases = 0;
    auto expect_format_error = [&](auto loader, const std::string& bytes) {
        ++cases;
        std::istringstream in(bytes);
        try {
            loader(in);
        } catch (const FormatError&) {
            ++rejected;
        } catch (...) {
        }
    };
    auto lm = [](std::istream& in) { return load_model(in); };
    auto li = [](std::istream& in) { return load_index(in); };
    for (std::size_t cut = 0; cut < mbytes.size(); cut += 13) expect_format_error(lm, mbytes.substr(0, cut));
    for (std::size_t cut = 0; cut < ibytes.size(); ++cut) expect_format_error(li, ibytes.substr(0, cut));
    std::mt19937_64 rng(91);
    // Header corruption: version bytes, magic bytes and random garbage.
    for (int i = 0; i < 8; ++i) {
        std::string m = mbytes, x = ibytes;
        m[static_cast<std::size_t>(i)] ^= 0x5A;
        x[static_cast<std::size_t>(8 + i % 4)] ^= 0x5A;
        expect_format_error(lm, m);
        expect_format_error(li, x);
    }
    for (int i = 0; i < 50; ++i) {
        std::string junk(static_cast<std::size_t>(rng() % 200), '\0');
        for (auto& ch : junk) ch = static_cast<char>(rng());
        expect_format_error(lm, "TITL-EMB" + junk);
        expect_format_error(li, "TITL-IDX" + junk);
    }
    return {rejected == cases, std::to_string(rejected) + "/" + std::to_string(cases) +
                                   " corrupt or truncated inputs rejected with format errors; round trips lossless"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient-correctness", gradient_correctness},
        {"distributional-property", distributional_property},
        {"training-scale", training_scale},
        {"retrieval-oracle", retrieval_oracle},
        {"feedback-arithmetic", feedback_arithmetic},
        {"levenshtein-oracle", levenshtein_oracle},
        {"no-repeat", no_repeat},
        {"end-to-end-http", end_to_end_http},
        {"round-trip-persistence", round_trip_persistence},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failures ? std::to_string(failures) + " criterion(s) failed" : "all criteria passed") << std::endl;
    return failures ? 1 : 0;
}
