#include <iostream>

#include "ttune/cli.hpp"

int main(int argc, char** argv) {
  const ttune::CliParse parsed = ttune::parse_args(argc, argv, std::cout, std::cerr);
  if (parsed.exit_code >= 0) return parsed.exit_code;
  return ttune::run_pipeline(parsed.config, std::cout, std::cerr);
}
