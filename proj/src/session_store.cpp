#include "titl/session_store.hpp"

#include <fstream>
#include <sstream>

namespace titl {

nlohmann::json session_to_json(const Session& s) {
    using nlohmann::json;
    return json{
        {"session_id", s.session_id},
        {"query_text", s.query_text},
        {"query_vector", s.query_vector},
        {"k", s.k},
        {"mode", s.mode.name()},
        {"alpha", s.mode.alpha()},
        {"relevant", s.relevant},
        {"irrelevant", s.irrelevant},
        {"shown", s.shown},
        {"batches_served", s.batches_served},
        {"created_at",
         std::chrono::duration_cast<std::chrono::seconds>(s.created_at.time_since_epoch()).count()},
    };
}

Session session_from_json(const nlohmann::json& j) {
    try {
        Session s;
        s.session_id = j.at("session_id").get<std::string>();
        s.query_text = j.at("query_text").get<std::string>();
        s.query_vector = j.at("query_vector").get<std::vector<double>>();
        s.k = j.at("k").get<std::size_t>();
        s.mode = SearchMode::parse(j.at("mode").get<std::string>(), j.at("alpha").get<double>());
        s.relevant = j.at("relevant").get<std::vector<std::uint64_t>>();
        s.irrelevant = j.at("irrelevant").get<std::set<std::uint64_t>>();
        s.shown = j.at("shown").get<std::set<std::uint64_t>>();
        s.batches_served = j.at("batches_served").get<std::uint64_t>();
        s.created_at = std::chrono::system_clock::time_point(
            std::chrono::seconds(j.at("created_at").get<std::int64_t>()));
        if (s.k < 1) throw FormatError("k", "must be at least 1");
        for (auto id : s.relevant)
            if (!s.shown.contains(id) || s.irrelevant.contains(id))
                throw FormatError("relevant", "id " + std::to_string(id) + " violates session invariants");
        for (auto id : s.irrelevant)
            if (!s.shown.contains(id)) throw FormatError("irrelevant", "id " + std::to_string(id) + " not shown");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("session", e.what());
    } catch (const FormatError&) {
        throw;
    } catch (const ValidationError& e) {
        throw FormatError("session.mode", e.what());
    }
}

void SessionStore::insert(Session session) {
    auto slot = std::make_shared<Slot>();
    const std::string id = session.session_id;
    slot->session = std::move(session);
    slot->last_access = Clock::now().time_since_epoch().count();
    std::lock_guard lock(mutex_);
    slots_[id] = std::move(slot);
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) {
    const auto now = Clock::now();
    std::lock_guard lock(mutex_);
    auto it = slots_.find(id);
    if (it == slots_.end()) return nullptr;
    const auto last = Clock::time_point(Clock::duration(it->second->last_access.load()));
    if (now - last > ttl_) {
        slots_.erase(it);
        return nullptr;
    }
    it->second->last_access = now.time_since_epoch().count();
    return it->second;
}

std::size_t SessionStore::evict_expired() {
    const auto now = Clock::now();
    std::lock_guard lock(mutex_);
    return std::erase_if(slots_, [&](const auto& kv) {
        return now - Clock::time_point(Clock::duration(kv.second->last_access.load())) > ttl_;
    });
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mutex_);
    return slots_.size();
}

std::vector<Session> SessionStore::copy_all() const {
    std::vector<std::shared_ptr<Slot>> slots;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, slot] : slots_) slots.push_back(slot);
    }
    std::vector<Session> out;
    for (const auto& slot : slots) {
        std::lock_guard lock(slot->mutex);
        out.push_back(slot->session);
    }
    return out;
}

void SessionStore::clear() {
    std::lock_guard lock(mutex_);
    slots_.clear();
}

void write_snapshot(const std::filesystem::path& path, const std::vector<Session>& sessions,
                    std::size_t corpus_sentences) {
    nlohmann::json doc{{"version", 1}, {"corpus_sentences", corpus_sentences}, {"sessions", nlohmann::json::array()}};
    for (const auto& s : sessions) doc["sessions"].push_back(session_to_json(s));

    // Write to a sibling file first so a failed write never clobbers the old snapshot.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write snapshot " + tmp.string());
        out << doc.dump();
        out.flush();
        if (!out) throw IoError("error writing snapshot " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move snapshot into place at " + path.string() + ": " + ec.message());
}

SnapshotLoad read_snapshot(const std::filesystem::path& path, std::size_t corpus_sentences) {
    SnapshotLoad result;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return result;

    std::ifstream in(path);
    if (!in) {
        result.warning = "cannot read session snapshot " + path.string();
        return result;
    }
    try {
        const auto doc = nlohmann::json::parse(in);
        if (doc.at("version").get<int>() != 1) {
            result.warning = "unsupported session snapshot version in " + path.string();
            return result;
        }
        const auto n = doc.at("corpus_sentences").get<std::size_t>();
        if (n != corpus_sentences) {
            result.warning = "session snapshot " + path.string() + " was taken against an index of " +
                             std::to_string(n) + " sentences, current index has " +
                             std::to_string(corpus_sentences) + "; starting with no sessions";
            return result;
        }
        for (const auto& js : doc.at("sessions")) result.sessions.push_back(session_from_json(js));
    } catch (const std::exception& e) {
        result.sessions.clear();
        result.warning = "corrupt session snapshot " + path.string() + ": " + e.what() +
                         "; starting with no sessions";
    }
    return result;
}

}  // namespace titl
