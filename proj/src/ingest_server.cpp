#include "audiofp/ingest_server.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "audiofp/dataset.hpp"
#include "audiofp/digest.hpp"
#include "audiofp/record.hpp"

namespace audiofp {

using nlohmann::json;

struct IngestServer::Impl {
  IngestOptions options;
  httplib::Server server;
  mutable std::mutex mutex;
  std::ofstream out;
  std::set<std::string> user_ids;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t records = 0;
  std::uint64_t sequence = 0;

  explicit Impl(IngestOptions opts) : options(std::move(opts)) {
    if (std::filesystem::exists(options.dataset_path)) {
      const Dataset existing = load_dataset(options.dataset_path);
      for (const UserRecord& r : existing.records) {
        user_ids.insert(r.user_id);
        seen.emplace(r.ip_digest, r.ua);
      }
      records = existing.records.size();
    }
    out.open(options.dataset_path, std::ios::app | std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + options.dataset_path.string());

    server.set_payload_max_length(options.max_body_bytes);
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex);
      res.set_content(json{{"status", "ok"}, {"records", records}}.dump(), "application/json");
    });
    server.Post("/v1/records", [this](const httplib::Request& req, httplib::Response& res) {
      handle_post(req, res);
    });
  }

  static void reject(httplib::Response& res, int status, const std::string& path,
                     const std::string& message) {
    res.status = status;
    res.set_content(json{{"error", message}, {"path", path}}.dump(), "application/json");
  }

  std::string next_user_id(const std::string& body) {
    // Under the lock.
    for (;;) {
      const std::string id =
          "p" + md5_hex(body + "\n" + std::to_string(sequence++) + "\n" + utc_timestamp()).substr(0, 16);
      if (!user_ids.contains(id)) return id;
    }
  }

  void handle_post(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      reject(res, 400, "$", std::string("malformed JSON: ") + e.what());
      return;
    }
    if (!body.is_object()) {
      reject(res, 400, "$", "record must be an object");
      return;
    }
    if (!body.contains("ipDigest") || body["ipDigest"].is_null()) {
      body["ipDigest"] = ip_digest(req.remote_addr, options.ip_salt);
    }
    const bool assign_id = !body.contains("userId") || body["userId"].is_null();
    if (assign_id) body["userId"] = "pending";

    UserRecord record;
    try {
      record = record_from_json(body);
      require_complete(record);
    } catch (const SchemaError& e) {
      reject(res, 400, e.path(), e.what());
      return;
    }

    std::lock_guard lock(mutex);
    if (assign_id) {
      record.user_id = next_user_id(req.body);
    } else if (user_ids.contains(record.user_id)) {
      reject(res, 409, "userId", "userId already stored");
      return;
    }
    const bool duplicate = !seen.emplace(record.ip_digest, record.ua).second;
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) {
      reject(res, 500, "$", "append failed");
      return;
    }
    user_ids.insert(record.user_id);
    ++records;
    res.status = duplicate ? 200 : 201;
    res.set_content(json{{"userId", record.user_id}, {"duplicate", duplicate}}.dump(),
                    "application/json");
  }
};

IngestServer::IngestServer(IngestOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

IngestServer::~IngestServer() { stop(); }

bool IngestServer::bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

int IngestServer::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool IngestServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void IngestServer::stop() {
  if (impl_) impl_->server.stop();
}

void IngestServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::size_t IngestServer::record_count() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->records;
}

}  // namespace audiofp
