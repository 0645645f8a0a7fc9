#pragma once

#include <optional>
#include <string>

#include "regtrace/model.hpp"

namespace regtrace {

// run-block knobs of a scenario file.
struct RunOptions {
  double gap_floor = 1e-6;      // relative to mu_N
  double safe_fraction = 0.5;   // truncation guard on admissible cuts
  int nodes_mult = 4;           // quadrature node multiplier
  std::string out_dir = "out";
  std::optional<int> m_override;
};

struct ScenarioFile {
  RawModel model;
  RunOptions run;
};

// Flat line-oriented key/value format with bracketed blocks:
//
//   model {
//     r = 1
//     a = 1.0
//     alpha = 3.0
//     T = 2
//     K = 512
//   }
//   potential {
//     term {
//       n = 1
//       row = 0.5 -0.3
//       row = -0.3 0.7
//     }
//   }
//   run {
//     gap_floor = 1e-6
//     safe_fraction = 0.5
//     nodes_mult = 4
//     out_dir = out
//     m_override = 22    # optional
//   }
//
// '#' starts a comment.  Matrices are given row-major, T rows of T
// reals.  Every key is required except m_override; unknown keys and
// blocks are rejected.
ScenarioFile parse_scenario_text(const std::string& text, const std::string& origin);
ScenarioFile parse_scenario_file(const std::string& path);

}  // namespace regtrace
