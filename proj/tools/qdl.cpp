#include <exception>
#include <iostream>

#include "qdl/cli.hpp"

int main(int argc, char** argv) {
  try {
    qdl::RunConfig cfg;
    std::string message;
    if (!qdl::parse_run_config(argc, argv, cfg, message)) {
      std::cout << message;
      return 0;
    }
    return qdl::emit(cfg, qdl::run_command(cfg));
  } catch (const std::exception& e) {
    std::cerr << "qdl: error: " << e.what() << "\n";
    return 2;
  }
}
