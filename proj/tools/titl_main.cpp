// titl: train embeddings, build sentence indexes, serve the search API and
// run the feedback loop in a terminal.

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "titl/corpus.hpp"
#include "titl/embeddings.hpp"
#include "titl/model_io.hpp"
#include "titl/query_loop.hpp"
#include "titl/search.hpp"
#include "titl/service.hpp"
#include "titl/service_config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested = true; }

std::shared_ptr<const titl::SearchEngine> load_engine(const std::string& model_path, const std::string& index_path,
                                                      const titl::TokenizerConfig& tok) {
    auto model = std::make_shared<const titl::EmbeddingModel>(titl::load_model(model_path));
    auto index = std::make_shared<const titl::SentenceIndex>(titl::load_index(index_path));
    return std::make_shared<const titl::SearchEngine>(std::move(model), std::move(index), tok);
}

int run_train(const std::string& corpus_path, const std::string& out, const titl::Hyperparams& hp,
              const titl::TokenizerConfig& tok) {
    const auto corpus = titl::load_corpus(corpus_path, tok);
    titl::TrainingLog log;
    const auto start = std::chrono::steady_clock::now();
    const auto model = titl::train(corpus, hp, &log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    titl::save_model(model, out);
    std::cout << "sentences: " << corpus.size() << '\n'
              << "tokens: " << corpus.token_count << '\n'
              << "vocab: " << model.vocab().size() << '\n'
              << "final_mean_loss: " << (log.epoch_mean_loss.empty() ? 0.0 : log.epoch_mean_loss.back()) << '\n'
              << "seconds: " << secs << '\n';
    return kExitOk;
}

int run_index(const std::string& corpus_path, const std::string& model_path, const std::string& out,
              const titl::TokenizerConfig& tok) {
    const auto model = titl::load_model(model_path);
    const auto corpus = titl::load_corpus(corpus_path, tok);
    const auto index = titl::build_index(model, corpus);
    titl::save_index(index, out);
    std::cout << "sentences: " << index.size() << '\n';
    return kExitOk;
}

int run_serve(titl::ServiceConfig cfg) {
    cfg.validate();
    if (cfg.model_path.empty()) throw titl::ConfigError("model_path", "is required");
    if (cfg.index_path.empty()) throw titl::ConfigError("index_path", "is required");

    auto engine = load_engine(cfg.model_path, cfg.index_path, {cfg.lowercase, cfg.strip_punctuation});
    titl::Service service(engine, cfg);
    if (auto warning = service.restore_snapshot()) std::cerr << "warning: " << *warning << '\n';

    if (service.bind() < 0) {
        std::cerr << "error: cannot bind " << cfg.bind << ':' << cfg.port << '\n';
        return kExitError;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    std::thread watcher([&] {
        while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
    });
    std::cerr << "serving " << engine->index().size() << " sentences on http://" << cfg.bind << ':' << cfg.port
              << '\n';
    const bool ok = service.listen();
    g_stop_requested = true;
    watcher.join();

    if (auto err = service.save_snapshot()) std::cerr << "error: session snapshot failed: " << *err << '\n';
    else if (cfg.snapshot_path) std::cerr << "saved sessions to " << *cfg.snapshot_path << '\n';
    return ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relevance-feedback example-sentence search over small corpora"};
    app.require_subcommand(1);

    titl::TokenizerConfig tok;
    auto add_tokenizer_flags = [&](CLI::App* cmd) {
        cmd->add_flag("--lowercase", tok.lowercase, "Lowercase tokens");
        cmd->add_flag("--strip-punctuation", tok.strip_punctuation, "Strip .,;:!?\"()[] around tokens");
    };

    std::string corpus_path, model_path, index_path, out_path;

    titl::Hyperparams hp;
    auto* train = app.add_subcommand("train", "Train subword skip-gram embeddings");
    train->add_option("--corpus", corpus_path, "Corpus file, one sentence per line")->required();
    train->add_option("--out", out_path, "Model file to write")->required();
    train->add_option("--dim", hp.dim, "Vector dimension")->capture_default_str();
    train->add_option("--window", hp.window, "Maximum context window")->capture_default_str();
    train->add_option("--negatives", hp.negatives, "Negative samples per context")->capture_default_str();
    train->add_option("--epochs", hp.epochs)->capture_default_str();
    train->add_option("--lr", hp.lr0, "Initial learning rate")->capture_default_str();
    train->add_option("--ngram-min", hp.ngram_min)->capture_default_str();
    train->add_option("--ngram-max", hp.ngram_max)->capture_default_str();
    train->add_option("--buckets", hp.buckets, "Subword hash buckets")->capture_default_str();
    train->add_option("--min-count", hp.min_count)->capture_default_str();
    train->add_option("--subsample", hp.subsample_t, "Subsampling threshold, 0 disables")->capture_default_str();
    train->add_option("--seed", hp.seed)->capture_default_str();
    add_tokenizer_flags(train);

    auto* index = app.add_subcommand("index", "Precompute sentence vectors for a corpus");
    index->add_option("--corpus", corpus_path)->required();
    index->add_option("--model", model_path)->required();
    index->add_option("--out", out_path, "Index file to write")->required();
    add_tokenizer_flags(index);

    std::string config_path;
    titl::ServiceConfig flags;
    std::string ttl_text;
    std::string snapshot;
    auto* serve = app.add_subcommand("serve", "Run the HTTP search service");
    serve->add_option("--config", config_path, "TOML config file");
    serve->add_option("--index", flags.index_path);
    serve->add_option("--model", flags.model_path);
    serve->add_option("--bind", flags.bind);
    serve->add_option("--port", flags.port);
    serve->add_option("--k", flags.default_k, "Default batch size");
    serve->add_option("--mode", flags.default_mode, "embedding, fuzzy or hybrid");
    serve->add_option("--alpha", flags.default_alpha, "Hybrid weight of the embedding score");
    serve->add_option("--ttl", ttl_text, "Session lifetime, e.g. 24h");
    serve->add_option("--snapshot", snapshot, "Session snapshot file");
    serve->add_option("--cors", flags.cors_origins, "Allowed CORS origins");
    serve->add_flag("--lowercase", flags.lowercase);
    serve->add_flag("--strip-punctuation", flags.strip_punctuation);

    std::string mode_name = "embedding";
    std::size_t k = 5;
    double alpha = 0.5;
    auto* query = app.add_subcommand("query", "Interactive terminal search loop");
    query->add_option("--index", index_path)->required();
    query->add_option("--model", model_path)->required();
    query->add_option("--mode", mode_name, "embedding, fuzzy or hybrid")->capture_default_str();
    query->add_option("--k", k)->capture_default_str();
    query->add_option("--alpha", alpha)->capture_default_str();
    add_tokenizer_flags(query);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*train) return run_train(corpus_path, out_path, hp, tok);
        if (*index) return run_index(corpus_path, model_path, out_path, tok);
        if (*serve) {
            titl::ServiceConfig cfg;
            if (!config_path.empty()) cfg = titl::load_service_config(config_path);
            // Explicit flags override the file.
            if (serve->count("--index")) cfg.index_path = flags.index_path;
            if (serve->count("--model")) cfg.model_path = flags.model_path;
            if (serve->count("--bind")) cfg.bind = flags.bind;
            if (serve->count("--port")) cfg.port = flags.port;
            if (serve->count("--k")) cfg.default_k = flags.default_k;
            if (serve->count("--mode")) cfg.default_mode = flags.default_mode;
            if (serve->count("--alpha")) cfg.default_alpha = flags.default_alpha;
            if (serve->count("--ttl")) cfg.session_ttl = titl::parse_duration(ttl_text);
            if (serve->count("--snapshot")) cfg.snapshot_path = snapshot;
            if (serve->count("--cors")) cfg.cors_origins = flags.cors_origins;
            if (serve->count("--lowercase")) cfg.lowercase = true;
            if (serve->count("--strip-punctuation")) cfg.strip_punctuation = true;
            return run_serve(std::move(cfg));
        }
        if (*query) {
            const auto mode = titl::SearchMode::parse(mode_name, alpha);
            if (k < 1) throw titl::ValidationError("--k must be at least 1");
            auto engine = load_engine(model_path, index_path, tok);
            return titl::run_query_loop(*engine, mode, k, std::cin, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
