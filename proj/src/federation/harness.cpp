// SPDX-License-Identifier: Apache-2.0
#include "dacp/federation/harness.hpp"

#include <cstdlib>

#include "dacp/error.hpp"
#include "dacp/util/crypto.hpp"

namespace dacp::federation {

namespace fs = std::filesystem;

Cluster::Cluster(Options options) : options_(std::move(options)) {
  std::string tmpl = (fs::temp_directory_path() / "dacp-cluster-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw Error::internal("cannot create scratch directory");
  root_ = fs::canonical(tmpl);

  server::UserStore users;
  for (const auto& [name, password] : options_.users) users.add(name, crypto::hash_password(password, true));

  try {
    for (std::size_t i = 0; i < options_.nodes; ++i) {
      fs::path dir = root_ / ("node" + std::to_string(i)) / options_.dataset;
      fs::create_directories(dir);
      dirs_.push_back(dir);

      datasource::DatasetRegistry registry;
      registry.add({options_.dataset, dir, "node " + std::to_string(i), options_.access, options_.writable});

      server::ServerConfig config;
      config.listen = "127.0.0.1:0";
      config.batch_size = options_.batch_size;
      config.frame_cap = options_.frame_cap;
      config.token_ttl_seconds = options_.token_ttl_seconds;

      auto node = std::make_unique<server::Server>(config, std::move(registry), users, options_.server);
      node->start();
      nodes_.push_back(std::move(node));
    }
  } catch (...) {
    shutdown();
    throw;
  }
}

Cluster::~Cluster() { shutdown(); }

std::string Cluster::uri(std::size_t i, const std::string& path) const {
  return "dacp://" + endpoint(i).to_string() + "/" + options_.dataset + "/" + path;
}

void Cluster::stop(std::size_t i) { nodes_.at(i)->stop(); }

void Cluster::shutdown() {
  for (auto& n : nodes_) n->stop();
  nodes_.clear();
  if (!root_.empty()) {
    std::error_code ec;
    fs::remove_all(root_, ec);
    root_.clear();
  }
}

void Cluster::reset_counters() {
  for (auto& n : nodes_) {
    n->traffic().reset();
    n->source_stats().reset();
  }
}

std::uint64_t Cluster::batch_payload_out(std::size_t i) const {
  return nodes_.at(i)->traffic().payload_out(wire::MsgType::Batch);
}

}  // namespace dacp::federation
