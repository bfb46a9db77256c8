#include <iostream>
#include <thread>

#include "lsv/acceptance.hpp"

// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
int main() {
  lsv::acceptance::Options options;
  options.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto results = lsv::acceptance::run_all(options);
  bool all = true;
  std::cout << "\n";
  for (const auto& r : results) {
    std::cout << lsv::acceptance::summary_line(r) << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILED") << std::endl;
  return all ? 0 : 1;
}
