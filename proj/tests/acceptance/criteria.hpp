#pragma once

// The acceptance suite: one pass/fail line per criterion, shared by the
// acceptance binary and the validate subcommand.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace kamtori::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  int jobs = 1;
  std::uint64_t seed = 1;
  bool flip_sign = false;             // mutation: flip the homological solve
  std::filesystem::path scratch;      // survey CSVs for the determinism check; empty = temp dir
  std::vector<int> only;              // empty = all criteria
};

inline constexpr int kCriteria = 12;

/// Runs the criteria in order, printing each line to `out` as it completes.
std::vector<CriterionResult> run_all(const Options& opts, std::ostream& out);

std::string format_line(const CriterionResult& r);

}  // namespace kamtori::acceptance
