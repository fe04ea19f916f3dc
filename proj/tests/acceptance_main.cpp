// One line per acceptance criterion; exit status is nonzero if any fails.
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "bipolymer/acceptance.hpp"
#include "bipolymer/cli.hpp"

int main(int argc, char** argv) {
  bipolymer::cli::apply_thread_setting();
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : bipolymer::run_acceptance(ids)) {
    if (!c.passed) ++failed;
    std::cout << "criterion " << std::setw(2) << c.id << ": " << (c.passed ? "PASS" : "FAIL") << "  "
              << c.title << " [" << std::fixed << std::setprecision(2) << c.seconds << " s]\n"
              << "    " << c.detail << "\n"
              << std::flush;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
