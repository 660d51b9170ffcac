#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

namespace audiofp {

struct IngestOptions {
  std::filesystem::path dataset_path;
  std::string ip_salt = "audiofp-ingest";
  std::size_t max_body_bytes = 1 << 20;
};

/// HTTP endpoint for probe submissions.
///
///   POST /v1/records  one record per request body
///     201 {"userId", "duplicate": false}  stored
///     200 {"userId", "duplicate": true}   stored; (ipDigest, ua) seen before
///     400 {"error", "path"}               schema or completeness violation
///     413                                 body over max_body_bytes
///   GET /v1/health    200 {"status": "ok", "records": n}
///
/// Missing userId or ipDigest are filled in by the server; ipDigest is derived
/// from the peer address. Appends go through one mutex-guarded writer.
class IngestServer {
 public:
  explicit IngestServer(IngestOptions options);
  ~IngestServer();
  IngestServer(const IngestServer&) = delete;
  IngestServer& operator=(const IngestServer&) = delete;

  bool bind(const std::string& host, int port);
  /// Returns the chosen port, or -1.
  int bind_to_any_port(const std::string& host);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  std::size_t record_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace audiofp
