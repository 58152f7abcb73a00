#pragma once

#include <string>
#include <vector>

#include "dfl/io.hpp"

namespace dfl {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  double seconds = 0.0;
  Json details;
};

struct AcceptanceOptions {
  bool heavy = true; // include the d=3 container runs (criterion 4)
  unsigned long long seed = 20240817ull;
};

// Runs one acceptance criterion (1..10).
CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed = false;
  Json to_json(bool include_timing = true) const;
};

// Runs the full gate, printing one line per criterion to stdout when
// verbose.
AcceptanceReport run_acceptance(const AcceptanceOptions& opt = {}, bool verbose = true);

} // namespace dfl
