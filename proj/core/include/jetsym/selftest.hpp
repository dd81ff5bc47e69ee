#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jetsym/oracle.hpp"

namespace jetsym {

struct PropertyResult {
  std::string name;
  std::string group;
  bool pass = false;
  double max_residual = 0;
  std::string detail;
  double seconds = 0;
};

struct SelftestContext {
  std::uint64_t seed = kDefaultSeed;
};

struct Property {
  std::string name;
  std::string group;
  std::string description;
  // Fills pass, max_residual and detail; name, group and timing are set by
  // the runner. Exceptions count as failures.
  std::function<void(const SelftestContext&, PropertyResult&)> run;
};

// The ten numbered acceptance criteria, in order.
const std::vector<Property>& acceptance_criteria();
// Per-module invariants and regressions.
const std::vector<Property>& module_properties();

PropertyResult run_property(const Property& p, const SelftestContext& ctx);
std::vector<PropertyResult> run_properties(const std::vector<Property>& ps, const SelftestContext& ctx);

// Wall-clock budget for a full selftest run, in seconds.
inline constexpr double kSelftestBudgetSeconds = 300.0;

}  // namespace jetsym
