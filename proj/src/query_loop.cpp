#include "titl/query_loop.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "titl/corpus.hpp"

namespace titl {
namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

bool read_line(std::istream& in, std::ostream& err, const std::string& prompt, std::string& line) {
    err << prompt << std::flush;
    if (!std::getline(in, line)) return false;
    line = trimmed(line);
    return true;
}

void print_batch(std::ostream& out, const std::vector<SearchResult>& batch) {
    for (const auto& r : batch)
        out << r.rank << ". [" << r.sentence_id << "] (" << std::fixed << std::setprecision(4) << r.score
            << ") " << r.text << '\n';
    out << std::flush;
}

// Returns false on end of input.
bool judge_batch(const SearchEngine& engine, Session& session, const std::vector<SearchResult>& batch,
                 std::istream& in, std::ostream& err) {
    for (const auto& r : batch) {
        for (;;) {
            std::string answer;
            if (!read_line(in, err, "judge " + std::to_string(r.rank) + " [r/i/s]> ", answer)) return false;
            if (answer == "r" || answer == "relevant") {
                engine.record_feedback(session, r.sentence_id, true);
            } else if (answer == "i" || answer == "irrelevant") {
                engine.record_feedback(session, r.sentence_id, false);
            } else if (!(answer.empty() || answer == "s" || answer == "skip")) {
                err << "please answer r (relevant), i (irrelevant) or s (skip)\n";
                continue;
            }
            break;
        }
    }
    return true;
}

}  // namespace

int run_query_loop(const SearchEngine& engine, SearchMode mode, std::size_t k, std::istream& in,
                   std::ostream& out, std::ostream& err) {
    for (;;) {
        std::string text;
        if (!read_line(in, err, "query> ", text)) return 0;
        if (text == "quit") return 0;
        Session session;
        try {
            session = engine.create_session(text, mode, k);
        } catch (const ValidationError& e) {
            err << e.what() << '\n';
            continue;
        }

        auto batch = engine.next_results(session);
        print_batch(out, batch);
        if (!judge_batch(engine, session, batch, in, err)) return 0;

        for (bool next_query = false; !next_query;) {
            std::string line;
            if (!read_line(in, err, "more | export FILE [txt|csv|json] | new | quit> ", line)) return 0;
            std::istringstream words(line);
            std::string cmd;
            words >> cmd;
            if (cmd == "more") {
                batch = engine.next_results(session);
                if (batch.empty()) {
                    err << "no more sentences\n";
                    continue;
                }
                print_batch(out, batch);
                if (!judge_batch(engine, session, batch, in, err)) return 0;
            } else if (cmd == "export") {
                std::string path, fmt = "txt";
                words >> path >> fmt;
                if (path.empty()) {
                    err << "usage: export FILE [txt|csv|json]\n";
                    continue;
                }
                try {
                    const auto format = parse_export_format(fmt);
                    std::ofstream file(path, std::ios::binary | std::ios::trunc);
                    file << engine.export_document(session, format);
                    if (!file) throw IoError("cannot write " + path);
                    err << "exported " << session.relevant.size() << " sentence(s) to " << path << '\n';
                } catch (const Error& e) {
                    err << e.what() << '\n';
                }
            } else if (cmd == "new") {
                next_query = true;
            } else if (cmd == "quit") {
                return 0;
            } else if (!cmd.empty()) {
                err << "unknown command '" << cmd << "'\n";
            }
        }
    }
}

}  // namespace titl
