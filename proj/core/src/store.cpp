#include "tutor/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <limits>

#include "tutor/serialization.hpp"

namespace tutor::store {

using nlohmann::json;

void Store::append_message(std::string_view caller, std::string_view session_id, const ChatMessage& message) {
  append(caller, session_id, SessionDelta{{message}, {}, {}, {}});
}

void Store::put_exercise(std::string_view caller, std::string_view session_id, const Exercise& exercise) {
  append(caller, session_id, SessionDelta{{}, {exercise}, {}, {}});
}

void Store::append_estimate(std::string_view caller, std::string_view session_id,
                            const scoring::ProficiencyEstimate& estimate) {
  append(caller, session_id, SessionDelta{{}, {}, {estimate}, {}});
}

void Store::append_areas(std::string_view caller, std::string_view session_id,
                         const std::vector<ImprovementArea>& areas) {
  append(caller, session_id, SessionDelta{{}, {}, {}, areas});
}

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS learners (
  learner_id   TEXT PRIMARY KEY,
  email        TEXT NOT NULL UNIQUE,
  display_name TEXT NOT NULL,
  created_at   INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
  session_id       TEXT PRIMARY KEY,
  learner_id       TEXT NOT NULL REFERENCES learners(learner_id),
  started_at       INTEGER NOT NULL,
  ended_at         INTEGER,
  summary          TEXT,
  summary_degraded INTEGER NOT NULL DEFAULT 0,
  analyzed_through INTEGER NOT NULL DEFAULT 0,
  last_activity    INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS sessions_by_learner ON sessions(learner_id, started_at);
CREATE TABLE IF NOT EXISTS messages (
  seq        INTEGER PRIMARY KEY AUTOINCREMENT,
  message_id TEXT NOT NULL UNIQUE,
  session_id TEXT NOT NULL REFERENCES sessions(session_id),
  role       TEXT NOT NULL,
  text       TEXT NOT NULL,
  created_at INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS messages_by_session ON messages(session_id, seq);
CREATE TABLE IF NOT EXISTS exercises (
  seq         INTEGER PRIMARY KEY AUTOINCREMENT,
  exercise_id TEXT NOT NULL UNIQUE,
  session_id  TEXT NOT NULL REFERENCES sessions(session_id),
  body        TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS estimates (
  seq        INTEGER PRIMARY KEY AUTOINCREMENT,
  session_id TEXT NOT NULL REFERENCES sessions(session_id),
  body       TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS areas (
  seq        INTEGER PRIMARY KEY AUTOINCREMENT,
  session_id TEXT NOT NULL REFERENCES sessions(session_id),
  body       TEXT NOT NULL
);
)sql";

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StorageError(std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int i, std::string_view text) {
    check(sqlite3_bind_text(stmt_, i, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Statement& bind(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Statement& bind_null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }

  /// True while a row is available.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT || (rc & 0xff) == SQLITE_CONSTRAINT) throw Conflict(sqlite3_errmsg(db_));
    throw StorageError(std::string("step failed: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::string text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw StorageError(std::string("bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec("COMMIT");
    done_ = true;
  }

 private:
  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown";
      sqlite3_free(err);
      throw StorageError(std::string(sql) + " failed: " + msg);
    }
  }

  sqlite3* db_;
  bool done_ = false;
};

LearnerProfile learner_from(const Statement& st) {
  return LearnerProfile{st.text(0), st.text(1), st.text(2), from_millis(st.integer(3))};
}

}  // namespace

SqliteStore::SqliteStore(const std::string& path) {
  const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StorageError("cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA foreign_keys = ON");
  if (path != ":memory:") exec("PRAGMA journal_mode = WAL");
  exec(kSchema);
}

SqliteStore::~SqliteStore() { sqlite3_close(db_); }

std::unique_ptr<SqliteStore> SqliteStore::open_data_dir(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  return std::make_unique<SqliteStore>((dir / "tutor.db").string());
}

void SqliteStore::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    throw StorageError("sql failed: " + msg);
  }
}

void SqliteStore::create_learner(const LearnerProfile& profile) {
  if (profile.learner_id.empty() || profile.email.empty()) {
    throw ValidationError("learner needs a learner_id and an email");
  }
  std::lock_guard lock(mu_);
  Statement st(db_, "INSERT INTO learners(learner_id, email, display_name, created_at) VALUES (?, ?, ?, ?)");
  st.bind(1, profile.learner_id).bind(2, profile.email).bind(3, profile.display_name);
  st.bind(4, to_millis(profile.created_at));
  st.run();
}

std::optional<LearnerProfile> SqliteStore::find_learner_by_email(std::string_view email) {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT learner_id, email, display_name, created_at FROM learners WHERE email = ?");
  st.bind(1, email);
  if (!st.step()) return std::nullopt;
  return learner_from(st);
}

LearnerProfile SqliteStore::get_learner(std::string_view learner_id) {
  std::lock_guard lock(mu_);
  Statement st(db_, "SELECT learner_id, email, display_name, created_at FROM learners WHERE learner_id = ?");
  st.bind(1, learner_id);
  if (!st.step()) throw NotFound("learner " + std::string(learner_id) + " not found");
  return learner_from(st);
}

std::optional<std::string> SqliteStore::owner_of(std::string_view session_id) {
  Statement st(db_, "SELECT learner_id FROM sessions WHERE session_id = ?");
  st.bind(1, session_id);
  if (!st.step()) return std::nullopt;
  return st.text(0);
}

void SqliteStore::check_owner(std::string_view caller, std::string_view session_id) {
  const auto owner = owner_of(session_id);
  if (!owner) throw NotFound("session " + std::string(session_id) + " not found");
  if (*owner != caller) throw Forbidden("session " + std::string(session_id) + " belongs to another learner");
}

void SqliteStore::write_delta(std::string_view session_id, const SessionDelta& delta) {
  if (!delta.messages.empty()) {
    std::int64_t last = 0;
    {
      Statement st(db_, "SELECT created_at FROM messages WHERE session_id = ? ORDER BY seq DESC LIMIT 1");
      st.bind(1, session_id);
      last = st.step() ? st.integer(0) : std::numeric_limits<std::int64_t>::min();
    }
    Statement st(db_,
                 "INSERT INTO messages(message_id, session_id, role, text, created_at) VALUES (?, ?, ?, ?, ?)");
    for (const auto& m : delta.messages) {
      if (m.text.empty()) throw ValidationError("message text is empty");
      const auto at = to_millis(m.created_at);
      if (at < last) throw ValidationError("message " + m.message_id + " is older than the previous message");
      last = at;
      st.bind(1, m.message_id).bind(2, session_id).bind(3, provider::to_string(m.role)).bind(4, m.text).bind(5, at);
      st.run();
      st.reset();
    }
  }
  if (!delta.exercises.empty()) {
    for (const auto& e : delta.exercises) {
      Statement owner(db_, "SELECT session_id FROM exercises WHERE exercise_id = ?");
      owner.bind(1, e.exercise_id);
      if (owner.step() && owner.text(0) != session_id) {
        throw Conflict("exercise " + e.exercise_id + " belongs to another session");
      }
      Statement st(db_,
                   "INSERT INTO exercises(exercise_id, session_id, body) VALUES (?, ?, ?) "
                   "ON CONFLICT(exercise_id) DO UPDATE SET body = excluded.body");
      st.bind(1, e.exercise_id).bind(2, session_id).bind(3, json(e).dump());
      st.run();
    }
  }
  for (const auto& e : delta.estimates) {
    Statement st(db_, "INSERT INTO estimates(session_id, body) VALUES (?, ?)");
    st.bind(1, session_id).bind(2, json(e).dump());
    st.run();
  }
  for (const auto& a : delta.areas) {
    Statement st(db_, "INSERT INTO areas(session_id, body) VALUES (?, ?)");
    st.bind(1, session_id).bind(2, json(a).dump());
    st.run();
  }
}

void SqliteStore::commit(std::string_view caller, const Session& header, const SessionDelta& delta) {
  if (header.session_id.empty()) throw ValidationError("session_id is empty");
  if (header.learner_id != caller) throw Forbidden("session header names another learner");
  if (header.ended_at && *header.ended_at < header.started_at) {
    throw ValidationError("session ended before it started");
  }
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  if (const auto owner = owner_of(header.session_id)) {
    if (*owner != caller) throw Forbidden("session " + header.session_id + " belongs to another learner");
    Statement st(db_,
                 "UPDATE sessions SET ended_at = ?, summary = ?, summary_degraded = ?, analyzed_through = ?, "
                 "last_activity = ? WHERE session_id = ?");
    if (header.ended_at) st.bind(1, to_millis(*header.ended_at));
    else st.bind_null(1);
    if (header.summary) st.bind(2, header.summary->text);
    else st.bind_null(2);
    st.bind(3, std::int64_t{header.summary && header.summary->degraded ? 1 : 0});
    st.bind(4, static_cast<std::int64_t>(header.analyzed_through));
    st.bind(5, to_millis(header.last_activity)).bind(6, header.session_id);
    st.run();
  } else {
    {
      Statement known(db_, "SELECT 1 FROM learners WHERE learner_id = ?");
      known.bind(1, caller);
      if (!known.step()) throw NotFound("learner " + std::string(caller) + " not found");
    }
    Statement st(db_,
                 "INSERT INTO sessions(session_id, learner_id, started_at, ended_at, summary, summary_degraded, "
                 "analyzed_through, last_activity) VALUES (?, ?, ?, ?, ?, ?, ?, ?)");
    st.bind(1, header.session_id).bind(2, header.learner_id).bind(3, to_millis(header.started_at));
    if (header.ended_at) st.bind(4, to_millis(*header.ended_at));
    else st.bind_null(4);
    if (header.summary) st.bind(5, header.summary->text);
    else st.bind_null(5);
    st.bind(6, std::int64_t{header.summary && header.summary->degraded ? 1 : 0});
    st.bind(7, static_cast<std::int64_t>(header.analyzed_through));
    st.bind(8, to_millis(header.last_activity));
    st.run();
  }
  write_delta(header.session_id, delta);
  tx.commit();
}

void SqliteStore::append(std::string_view caller, std::string_view session_id, const SessionDelta& delta) {
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  check_owner(caller, session_id);
  write_delta(session_id, delta);
  tx.commit();
}

Session SqliteStore::load_session(std::string_view session_id) {
  Session s;
  {
    Statement st(db_,
                 "SELECT session_id, learner_id, started_at, ended_at, summary, summary_degraded, analyzed_through, "
                 "last_activity FROM sessions WHERE session_id = ?");
    st.bind(1, session_id);
    if (!st.step()) throw NotFound("session " + std::string(session_id) + " not found");
    s.session_id = st.text(0);
    s.learner_id = st.text(1);
    s.started_at = from_millis(st.integer(2));
    if (!st.is_null(3)) s.ended_at = from_millis(st.integer(3));
    if (!st.is_null(4)) s.summary = SessionSummary{st.text(4), st.integer(5) != 0};
    s.analyzed_through = static_cast<std::size_t>(st.integer(6));
    s.last_activity = from_millis(st.integer(7));
  }
  {
    Statement st(db_,
                 "SELECT message_id, role, text, created_at FROM messages WHERE session_id = ? ORDER BY seq");
    st.bind(1, session_id);
    while (st.step()) {
      s.messages.push_back(ChatMessage{st.text(0),
                                       st.text(1) == "learner" ? provider::Role::learner : provider::Role::assistant,
                                       st.text(2), from_millis(st.integer(3))});
    }
  }
  {
    Statement st(db_, "SELECT body FROM exercises WHERE session_id = ? ORDER BY seq");
    st.bind(1, session_id);
    while (st.step()) s.exercises.push_back(json::parse(st.text(0)).get<Exercise>());
  }
  {
    Statement st(db_, "SELECT body FROM estimates WHERE session_id = ? ORDER BY seq");
    st.bind(1, session_id);
    while (st.step()) s.estimates.push_back(json::parse(st.text(0)).get<scoring::ProficiencyEstimate>());
  }
  {
    Statement st(db_, "SELECT body FROM areas WHERE session_id = ? ORDER BY seq");
    st.bind(1, session_id);
    while (st.step()) s.areas.push_back(json::parse(st.text(0)).get<ImprovementArea>());
  }
  return s;
}

Session SqliteStore::get_session(std::string_view caller, std::string_view session_id) {
  std::lock_guard lock(mu_);
  check_owner(caller, session_id);
  return load_session(session_id);
}

std::vector<Session> SqliteStore::list_sessions(std::string_view caller) {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  {
    Statement st(db_, "SELECT session_id FROM sessions WHERE learner_id = ? ORDER BY started_at, session_id");
    st.bind(1, caller);
    while (st.step()) ids.push_back(st.text(0));
  }
  std::vector<Session> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(load_session(id));
  return out;
}

std::vector<OpenSessionRef> SqliteStore::list_open_sessions() {
  std::lock_guard lock(mu_);
  Statement st(db_,
               "SELECT session_id, learner_id, last_activity FROM sessions WHERE ended_at IS NULL "
               "ORDER BY last_activity, session_id");
  std::vector<OpenSessionRef> out;
  while (st.step()) out.push_back({st.text(0), st.text(1), from_millis(st.integer(2))});
  return out;
}

std::optional<TranscriptFormat> parse_transcript_format(std::string_view name) {
  if (name == "json") return TranscriptFormat::json;
  if (name == "text") return TranscriptFormat::text;
  return std::nullopt;
}

std::string export_transcript(Store& store, std::string_view caller, std::string_view session_id,
                              TranscriptFormat format) {
  const Session session = store.get_session(caller, session_id);
  if (format == TranscriptFormat::json) return json(session).dump(2) + "\n";
  std::string out;
  for (const auto& m : session.messages) {
    std::string text = m.text;
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), '\r', ' ');
    out += "[" + format_hh_mm(m.created_at) + "] " + (m.role == provider::Role::learner ? "Learner" : "Tutor") +
           ": " + text + "\n";
  }
  return out;
}

DashboardData dashboard_data(Store& store, std::string_view learner_id) {
  DashboardData d;
  for (auto state : {ExerciseState::issued, ExerciseState::attempted, ExerciseState::completed}) {
    d.exercise_counts[std::string(to_string(state))] = 0;
  }
  const auto sessions = store.list_sessions(learner_id);
  d.session_count = sessions.size();
  for (const auto& s : sessions) {
    for (const auto& e : s.estimates) {
      if (e.kind == scoring::EstimateKind::full) d.level_series.push_back({e.assessed_at, e.combined_level, s.session_id});
    }
    for (const auto& a : s.areas) d.area_history.push_back({a.detected_at, a.area, a.confidence, s.session_id});
    for (const auto& e : s.exercises) ++d.exercise_counts[std::string(to_string(e.state))];
  }
  std::stable_sort(d.level_series.begin(), d.level_series.end(),
                   [](const auto& a, const auto& b) { return a.at < b.at; });
  std::stable_sort(d.area_history.begin(), d.area_history.end(),
                   [](const auto& a, const auto& b) { return a.at < b.at; });
  return d;
}

void to_json(json& j, const DashboardData& d) {
  json levels = json::array();
  for (const auto& p : d.level_series) {
    levels.push_back({{"at", format_iso8601(p.at)}, {"combined_level", p.combined_level}, {"session_id", p.session_id}});
  }
  json areas = json::array();
  for (const auto& p : d.area_history) {
    areas.push_back({{"at", format_iso8601(p.at)},
                     {"area", p.area},
                     {"confidence", p.confidence},
                     {"session_id", p.session_id}});
  }
  j = {{"level_series", std::move(levels)},
       {"area_history", std::move(areas)},
       {"session_count", d.session_count},
       {"exercise_counts", d.exercise_counts}};
}

}  // namespace tutor::store
