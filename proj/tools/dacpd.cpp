// SPDX-License-Identifier: Apache-2.0
// dacpd: serves the datasets named in a config file until SIGINT/SIGTERM.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <pthread.h>

#include "dacp/server/server.hpp"
#include "dacp/util/crypto.hpp"
#include "dacp/util/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"DACP server", "dacpd"};
  std::string config_file, to_hash, level = "info";
  app.add_option("--config", config_file, "Server config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--hash-password", to_hash, "Print the stored hash for a password and exit");
  app.add_option("--log-level", level, "debug, info, warn or error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (app.count("--hash-password")) {
    std::cout << dacp::crypto::hash_password(to_hash) << "\n";
    return 0;
  }
  if (config_file.empty()) {
    std::cerr << "dacpd: --config is required\n";
    return 2;
  }

  using dacp::log::Level;
  dacp::log::set_level(level == "debug" ? Level::Debug : level == "warn" ? Level::Warn
                                                       : level == "error" ? Level::Error
                                                                           : Level::Info);

  // Signals are taken synchronously by this thread; workers inherit the mask.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  std::signal(SIGPIPE, SIG_IGN);

  std::unique_ptr<dacp::server::Server> server;
  try {
    auto config = dacp::server::ServerConfig::load_file(config_file);
    server = dacp::server::Server::from_config(config);
    server->start();
  } catch (const dacp::Error& e) {
    dacp::log::error("startup_failed", {{"code", static_cast<int>(e.code())}, {"message", e.what()}});
    return 1;
  }

  int sig = 0;
  sigwait(&stop_signals, &sig);
  dacp::log::info("shutdown", {{"signal", sig}});
  server->stop();
  return 0;
}
