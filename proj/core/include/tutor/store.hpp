#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tutor/records.hpp"

struct sqlite3;

namespace tutor::store {

/// The record exists but belongs to another learner.
class Forbidden : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// Uniqueness violation, e.g. a second learner with the same email.
class Conflict : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

/// Records to add to one session in a single transaction, together with the
/// session header (ended_at, summary, analysis watermark, last activity).
struct SessionDelta {
  std::vector<ChatMessage> messages;
  std::vector<Exercise> exercises;  // upserted by exercise_id
  std::vector<scoring::ProficiencyEstimate> estimates;
  std::vector<ImprovementArea> areas;
};

struct OpenSessionRef {
  std::string session_id;
  std::string learner_id;
  Timestamp last_activity{};
};

/// Every learner-facing operation takes the caller's learner_id and checks it
/// against the record owner before reading or writing anything.
class Store {
 public:
  virtual ~Store() = default;

  /// Throws Conflict for a duplicate learner_id or email.
  virtual void create_learner(const LearnerProfile& profile) = 0;
  virtual std::optional<LearnerProfile> find_learner_by_email(std::string_view email) = 0;
  /// Throws NotFound.
  virtual LearnerProfile get_learner(std::string_view learner_id) = 0;

  /// Inserts or updates the session header and appends the delta atomically.
  /// The header's messages/exercises/estimates/areas vectors are ignored.
  virtual void commit(std::string_view caller, const Session& header, const SessionDelta& delta = {}) = 0;
  /// Appends to an existing session without touching its header.
  virtual void append(std::string_view caller, std::string_view session_id, const SessionDelta& delta) = 0;
  /// Full aggregate. Throws NotFound or Forbidden.
  virtual Session get_session(std::string_view caller, std::string_view session_id) = 0;
  /// The caller's sessions ordered by start time.
  virtual std::vector<Session> list_sessions(std::string_view caller) = 0;

  /// System-level sweep for idle timeouts; not exposed to learners.
  virtual std::vector<OpenSessionRef> list_open_sessions() = 0;

  void put_session(std::string_view caller, const Session& header) { commit(caller, header); }
  void append_message(std::string_view caller, std::string_view session_id, const ChatMessage& message);
  void put_exercise(std::string_view caller, std::string_view session_id, const Exercise& exercise);
  void append_estimate(std::string_view caller, std::string_view session_id,
                       const scoring::ProficiencyEstimate& estimate);
  void append_areas(std::string_view caller, std::string_view session_id, const std::vector<ImprovementArea>& areas);
};

/// SQLite-backed store. `path` is a database file or ":memory:".
class SqliteStore final : public Store {
 public:
  explicit SqliteStore(const std::string& path);
  ~SqliteStore() override;
  SqliteStore(const SqliteStore&) = delete;
  SqliteStore& operator=(const SqliteStore&) = delete;

  /// <dir>/tutor.db, creating dir if needed.
  static std::unique_ptr<SqliteStore> open_data_dir(const std::filesystem::path& dir);

  void create_learner(const LearnerProfile& profile) override;
  std::optional<LearnerProfile> find_learner_by_email(std::string_view email) override;
  LearnerProfile get_learner(std::string_view learner_id) override;
  void commit(std::string_view caller, const Session& header, const SessionDelta& delta = {}) override;
  void append(std::string_view caller, std::string_view session_id, const SessionDelta& delta) override;
  Session get_session(std::string_view caller, std::string_view session_id) override;
  std::vector<Session> list_sessions(std::string_view caller) override;
  std::vector<OpenSessionRef> list_open_sessions() override;

 private:
  void exec(const char* sql);
  /// Owner of a session, or nothing if the id is unknown.
  std::optional<std::string> owner_of(std::string_view session_id);
  /// NotFound / Forbidden unless caller owns the session.
  void check_owner(std::string_view caller, std::string_view session_id);
  void write_delta(std::string_view session_id, const SessionDelta& delta);
  Session load_session(std::string_view session_id);

  std::mutex mu_;
  sqlite3* db_ = nullptr;
};

enum class TranscriptFormat { json, text };

std::optional<TranscriptFormat> parse_transcript_format(std::string_view name);

/// json: the session document, pretty-printed with 2-space indent.
/// text: one "[HH:MM] Learner: ..." / "[HH:MM] Tutor: ..." line per message,
/// newline-terminated; line breaks inside a message become spaces.
std::string export_transcript(Store& store, std::string_view caller, std::string_view session_id,
                              TranscriptFormat format);

struct LevelPoint {
  Timestamp at{};
  double combined_level = 0.0;
  std::string session_id;
};

struct AreaPoint {
  Timestamp at{};
  std::string area;
  double confidence = 0.0;
  std::string session_id;
};

struct DashboardData {
  std::vector<LevelPoint> level_series;  // full estimates only, chronological
  std::vector<AreaPoint> area_history;   // chronological
  std::size_t session_count = 0;
  std::map<std::string, std::size_t> exercise_counts;  // every state present, possibly 0
};

DashboardData dashboard_data(Store& store, std::string_view learner_id);

void to_json(nlohmann::json& j, const DashboardData& d);

}  // namespace tutor::store
