// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "elicit/config.hpp"
#include "elicit/dialogue.hpp"
#include "elicit/tree_io.hpp"

namespace elicit {

inline constexpr int kReplySchemaVersion = 1;

using wire_json = nlohmann::ordered_json;

// The wire form of a Reply. The command line transcript and the HTTP API both
// emit exactly this document; the API adds only the session id.
inline wire_json reply_document(const Reply& r) {
  wire_json j;
  j["schema_version"] = kReplySchemaVersion;
  j["kind"] = to_string(r.kind);
  j["text"] = r.text;
  wire_json options = wire_json::array();
  for (const auto& o : r.options) {
    wire_json oj;
    oj["index"] = o.index;
    oj["summary"] = o.summary;
    oj["granule"] = to_json(o.granule);
    options.push_back(std::move(oj));
  }
  j["options"] = std::move(options);
  wire_json services = wire_json::array();
  for (const auto& s : r.services) {
    wire_json sj;
    sj["provider_id"] = s.provider_id;
    sj["score"] = s.score;
    wire_json fields = wire_json::object();
    for (const auto& [k, v] : s.fields) fields[k] = v;
    sj["fields"] = std::move(fields);
    services.push_back(std::move(sj));
  }
  j["services"] = std::move(services);
  j["end_tag"] = r.end_tag;
  j["round"] = r.round;
  j["cursor"] = r.cursor ? wire_json(*r.cursor) : wire_json();
  return j;
}

// 128 random bits, base64url without padding (22 characters).
inline std::string new_session_id() {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
  static std::mutex mu;
  static std::random_device device;
  std::array<std::uint8_t, 16> bytes{};
  {
    std::lock_guard<std::mutex> lock(mu);
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::uint32_t v = device();
      for (std::size_t k = 0; k < 4; ++k) bytes[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
  }
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (auto b : bytes) {
    acc = (acc << 8) | b;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      out.push_back(kAlphabet[(acc >> bits) & 0x3f]);
    }
  }
  if (bits > 0) out.push_back(kAlphabet[(acc << (6 - bits)) & 0x3f]);
  return out;
}

// In-memory, volatile. A session is checked out for the length of one turn;
// a second checkout while the first is held reports busy.
class SessionStore {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;
  using Clock = std::function<TimePoint()>;

  explicit SessionStore(std::chrono::seconds ttl, Clock clock = [] { return std::chrono::steady_clock::now(); })
      : ttl_(ttl), clock_(std::move(clock)) {}

  enum class Status { ok, missing, busy };

  class Lease {
   public:
    Lease() = default;
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    Lease(Lease&& o) noexcept : store_(o.store_), id_(std::move(o.id_)), session_(o.session_) { o.store_ = nullptr; }
    Lease& operator=(Lease&& o) noexcept {
      if (this != &o) {
        if (store_) store_->release(id_);
        store_ = o.store_;
        id_ = std::move(o.id_);
        session_ = o.session_;
        o.store_ = nullptr;
      }
      return *this;
    }
    ~Lease() {
      if (store_) store_->release(id_);
    }
    Session& session() { return *session_; }

   private:
    friend class SessionStore;
    Lease(SessionStore* store, std::string id, Session* s) : store_(store), id_(std::move(id)), session_(s) {}
    SessionStore* store_ = nullptr;
    std::string id_;
    Session* session_ = nullptr;
  };

  void insert(Session s) {
    std::lock_guard<std::mutex> lock(mu_);
    purge_locked();
    std::string id = s.id;
    entries_[id] = Entry{std::move(s), clock_(), false};
  }

  Status checkout(const std::string& id, Lease& lease) {
    std::lock_guard<std::mutex> lock(mu_);
    purge_locked();
    auto it = entries_.find(id);
    if (it == entries_.end()) return Status::missing;
    if (it->second.busy) return Status::busy;
    it->second.busy = true;
    lease = Lease(this, id, &it->second.session);
    return Status::ok;
  }

  std::size_t size() {
    std::lock_guard<std::mutex> lock(mu_);
    purge_locked();
    return entries_.size();
  }

 private:
  struct Entry {
    Session session;
    TimePoint last_used;
    bool busy = false;
  };

  void release(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(id);
    if (it == entries_.end()) return;
    it->second.busy = false;
    it->second.last_used = clock_();
  }

  void purge_locked() {
    const auto now = clock_();
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (!it->second.busy && now - it->second.last_used >= ttl_) it = entries_.erase(it);
      else ++it;
    }
  }

  std::chrono::seconds ttl_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, Entry> entries_;
};

struct ApiResponse {
  int status = 200;
  std::string body;
};

// Endpoint logic, independent of the transport so it can be driven directly.
class ApiService {
 public:
  ApiService(std::shared_ptr<const Registry> registry, const ServerConfig& config,
             SessionStore::Clock clock = [] { return std::chrono::steady_clock::now(); },
             TranscriptLog* log = nullptr)
      : registry_(std::move(registry)),
        store_(std::chrono::seconds(config.session_ttl_seconds), std::move(clock)),
        log_(log) {}

  SessionStore& sessions() { return store_; }

  // POST /sessions  {"utterance": "..."}
  ApiResponse create_session(const std::string& body) {
    wire_json req;
    if (!parse_object(body, req)) return error(400, "bad_request", "body must be a JSON object");
    if (!req.contains("utterance") || !req["utterance"].is_string())
      return error(400, "bad_request", "'utterance' must be a string");
    const std::string utterance = req["utterance"].get<std::string>();
    std::string id = new_session_id();
    auto started = start_session(utterance, *registry_, id);
    if (log_) log_->record(started.session ? id : std::string(), utterance, started.reply);
    wire_json doc = reply_document(started.reply);
    if (started.session) {
      doc["session_id"] = id;
      store_.insert(std::move(*started.session));
    } else {
      doc["session_id"] = nullptr;
    }
    return {200, doc.dump()};
  }

  // POST /sessions/{id}/turns  {"text": "..."} or {"option": k}
  ApiResponse post_turn(const std::string& id, const std::string& body) {
    wire_json req;
    if (!parse_object(body, req)) return error(400, "bad_request", "body must be a JSON object");
    std::string text;
    std::optional<std::size_t> option;
    if (req.contains("text")) {
      if (!req["text"].is_string()) return error(400, "bad_request", "'text' must be a string");
      text = req["text"].get<std::string>();
    }
    if (req.contains("option")) {
      if (!req["option"].is_number_unsigned()) return error(400, "bad_request", "'option' must be a non-negative integer");
      option = req["option"].get<std::size_t>();
    }
    if (!req.contains("text") && !option) return error(400, "bad_request", "need 'text' or 'option'");

    SessionStore::Lease lease;
    switch (store_.checkout(id, lease)) {
      case SessionStore::Status::missing: return error(404, "not_found", "unknown or expired session");
      case SessionStore::Status::busy: return error(409, "busy", "a turn is already in progress for this session");
      case SessionStore::Status::ok: break;
    }
    Session& s = lease.session();
    if (s.end_tag == 1) return error(409, "finished", "session already finished");
    Reply reply;
    try {
      reply = handle_turn(s, text, *registry_, option);
    } catch (const StateError& e) {
      return error(409, "finished", e.what());
    }
    if (log_) log_->record(id, text, reply);
    wire_json doc = reply_document(reply);
    doc["session_id"] = id;
    return {200, doc.dump()};
  }

  // GET /trees/{type}
  ApiResponse get_tree(const std::string& type) const {
    const PolicyTree* t = registry_->tree(type);
    if (!t) return error(404, "not_found", "no policy tree for '" + type + "'");
    return {200, serialize_tree(*t)};
  }

  // GET /health
  ApiResponse health() {
    wire_json j;
    j["schema_version"] = kReplySchemaVersion;
    j["status"] = "ok";
    j["sessions"] = store_.size();
    wire_json types = wire_json::array();
    for (const auto& [type, tree] : registry_->trees) types.push_back(type);
    j["service_types"] = std::move(types);
    return {200, j.dump()};
  }

  static ApiResponse error(int status, const std::string& code, const std::string& message) {
    wire_json j;
    j["schema_version"] = kReplySchemaVersion;
    j["error"] = {{"code", code}, {"message", message}};
    return {status, j.dump()};
  }

 private:
  static bool parse_object(const std::string& body, wire_json& out) {
    try {
      out = wire_json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
      return false;
    }
    return out.is_object();
  }

  std::shared_ptr<const Registry> registry_;
  SessionStore store_;
  TranscriptLog* log_;
};

inline void mount_api(httplib::Server& server, ApiService& api) {
  auto send = [](httplib::Response& res, const ApiResponse& r, const char* type = "application/json") {
    res.status = r.status;
    res.set_content(r.body, type);
  };
  server.Post("/sessions", [&api, send](const httplib::Request& req, httplib::Response& res) {
    send(res, api.create_session(req.body));
  });
  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/turns)", [&api, send](const httplib::Request& req, httplib::Response& res) {
    send(res, api.post_turn(req.matches[1], req.body));
  });
  server.Get(R"(/trees/([A-Za-z0-9_.-]+))", [&api, send](const httplib::Request& req, httplib::Response& res) {
    send(res, api.get_tree(req.matches[1]));
  });
  server.Get("/health", [&api, send](const httplib::Request&, httplib::Response& res) { send(res, api.health()); });
  server.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      auto r = ApiService::error(res.status, res.status == 404 ? "not_found" : "error", "no such endpoint");
      send(res, {res.status, r.body});
    }
  });
}

}  // namespace elicit
