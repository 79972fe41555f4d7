// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dacp/server/server.hpp"

namespace dacp::federation {

/// Several servers on loopback ephemeral ports in one process, each with
/// its own scratch directory. Test scaffolding.
class Cluster {
 public:
  struct Options {
    std::size_t nodes = 3;
    /// Name of the one dataset every node serves from `data_dir(i)`.
    std::string dataset = "data";
    datasource::Access access = datasource::Access::Public;
    bool writable = true;
    std::size_t batch_size = kDefaultBatchRows;
    std::uint32_t frame_cap = wire::kDefaultFrameCap;
    std::uint64_t token_ttl_seconds = 3600;
    /// Plain-text credentials; hashed at startup.
    std::vector<std::pair<std::string, std::string>> users;
    server::ServerOptions server;
  };

  Cluster() : Cluster(Options{}) {}
  explicit Cluster(Options options);
  ~Cluster();

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  std::size_t size() const { return nodes_.size(); }
  server::Server& node(std::size_t i) { return *nodes_.at(i); }
  Endpoint endpoint(std::size_t i) const { return nodes_.at(i)->endpoint(); }
  const std::filesystem::path& data_dir(std::size_t i) const { return dirs_.at(i); }
  /// dacp://127.0.0.1:<port>/<dataset>/<path>
  std::string uri(std::size_t i, const std::string& path) const;

  /// Stops one node; its port then refuses connections.
  void stop(std::size_t i);
  /// Stops every node and removes the scratch directories.
  void shutdown();
  void reset_counters();

  /// BATCH payload bytes a node has sent, over all its connections.
  std::uint64_t batch_payload_out(std::size_t i) const;

 private:
  Options options_;
  std::filesystem::path root_;
  std::vector<std::filesystem::path> dirs_;
  std::vector<std::unique_ptr<server::Server>> nodes_;
};

}  // namespace dacp::federation
