#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "titl/search.hpp"

namespace titl {

nlohmann::json session_to_json(const Session& session);
// Throws FormatError for malformed input; query tokens are recomputed by the caller.
Session session_from_json(const nlohmann::json& j);

// Live sessions with TTL eviction. Operations on one session are serialized
// by a per-session mutex; different sessions proceed independently.
class SessionStore {
public:
    using Clock = std::chrono::steady_clock;

    explicit SessionStore(std::chrono::seconds ttl) : ttl_(ttl) {}

    void insert(Session session);

    // Runs fn(Session&) under the session's lock. Returns nullopt (or false
    // for void callables) when the session is unknown or expired.
    template <typename F>
    auto with_session(const std::string& id, F&& fn) {
        using R = std::invoke_result_t<F, Session&>;
        auto slot = find(id);
        if constexpr (std::is_void_v<R>) {
            if (!slot) return false;
            std::lock_guard lock(slot->mutex);
            fn(slot->session);
            return true;
        } else {
            if (!slot) return std::optional<R>{};
            std::lock_guard lock(slot->mutex);
            return std::optional<R>(fn(slot->session));
        }
    }

    std::size_t evict_expired();
    std::size_t size() const;
    // Consistent copies of every live session, ordered by id.
    std::vector<Session> copy_all() const;
    void clear();

private:
    struct Slot {
        std::mutex mutex;
        Session session;
        std::atomic<Clock::rep> last_access;
    };

    std::shared_ptr<Slot> find(const std::string& id);

    std::chrono::seconds ttl_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

struct SnapshotLoad {
    std::vector<Session> sessions;
    std::optional<std::string> warning;
};

// Snapshot document: {"version":1, "corpus_sentences":N, "sessions":[...]}.
// Throws IoError when the file cannot be written.
void write_snapshot(const std::filesystem::path& path, const std::vector<Session>& sessions,
                    std::size_t corpus_sentences);

// Never throws for content problems: a missing file gives an empty result, a
// corrupt file or one made for a different index gives an empty result with
// a warning.
SnapshotLoad read_snapshot(const std::filesystem::path& path, std::size_t corpus_sentences);

}  // namespace titl
