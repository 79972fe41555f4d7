// SPDX-License-Identifier: Apache-2.0
#include <csignal>
#include <iostream>

#include "cli.hpp"
#include "dacp/util/log.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  dacp::log::set_level(dacp::log::Level::Warn);
  std::vector<std::string> args(argv + 1, argv + argc);
  return dacp::cli::run(args, std::cout, std::cerr);
}
