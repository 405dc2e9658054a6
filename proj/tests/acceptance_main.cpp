// Acceptance suite: runs every verification criterion at its pinned
// tolerance and prints one pass/fail line per criterion. Exit status is
// nonzero when any criterion fails.

#include <iostream>

#include "armax/acceptance.hpp"

int main() {
  const auto results = armax::acceptance::run_all();
  const bool ok = armax::acceptance::print_results(results, std::cout);
  return ok ? 0 : 1;
}
