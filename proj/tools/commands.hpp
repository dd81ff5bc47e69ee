#pragma once

#include <string>
#include <vector>

#include "problem.hpp"

namespace jetsym::cli {

inline const std::vector<std::string>& operations() {
  static const std::vector<std::string> ops{"prolong",     "mch",    "check-symmetry", "solve-ansatz",
                                            "invariants",  "reduce", "reconstruct",    "gauge-verify",
                                            "variational", "dynsys"};
  return ops;
}

struct CommandOutput {
  json claims = json::array();
  json result = json::object();
  json error;  // null unless a library error stopped the command
  bool passed() const;
};

// Library errors end the command and are recorded in `error`; input errors
// propagate as InputError.
CommandOutput run_operation(const std::string& op, const Problem& problem, const Oracle& oracle);

json verdict_json(const std::string& name, const Verdict& v);

}  // namespace jetsym::cli
