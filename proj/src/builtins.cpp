#include "ralm/problem_file.hpp"

namespace ralm {

const std::vector<std::pair<std::string, std::string>>& builtin_sources() {
  static const std::vector<std::pair<std::string, std::string>> sources = {
      {"paper-cpld-sphere", R"toml(# CPLD holds at the north pole while MFCQ and CRCQ fail.
name = "paper-cpld-sphere"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "(x - 1)^2 + y^2"
inequalities = ["x", "x + y^2", "x + y", "-x - y"]
start = [0.2, 0.1, 1.0]
reference_point = [0.0, 0.0, 1.0]
)toml"},
      {"paper-crsc-sphere", R"toml(# CRSC holds at the north pole, RCPLD does not.
name = "paper-crsc-sphere"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "x + y"
inequalities = ["x - y^2", "-x", "y - x^2", "-y"]
start = [0.1, 0.1, 1.0]
reference_point = [0.0, 0.0, 1.0]
)toml"},
      {"paper-split-equality", R"toml(# x = 0 written as two inequalities: CRCQ and QN hold, MFCQ fails.
name = "paper-split-equality"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "-x - z"
inequalities = ["x", "-x"]
start = [0.3, 0.0, 1.0]
reference_point = [0.0, 0.0, 1.0]
)toml"},
      {"equator-lp", R"toml(# min z on the sphere subject to z >= 0; solution on the equator with mu = 1.
name = "equator-lp"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "z"
inequalities = ["-z"]
start = [0.7071067811865476, 0.0, 0.7071067811865476]
reference_point = [1.0, 0.0, 0.0]
)toml"},
      {"infeasible-height", R"toml(# z = 2 has no solution on the unit sphere.
name = "infeasible-height"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "0"
equalities = ["z - 2"]
start = [0.6, 0.0, 0.8]
)toml"},
      {"paper-mfcq-sphere", R"toml(# MFCQ holds at the north pole, CRCQ fails.
name = "paper-mfcq-sphere"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "(x - 1)^2 + y^2"
inequalities = ["x", "x + y^2"]
start = [0.2, 0.1, 1.0]
reference_point = [0.0, 0.0, 1.0]
)toml"},
      {"paper-qn-sphere", R"toml(# Quasinormality holds at the north pole, RCPLD and CRSC fail.
name = "paper-qn-sphere"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "-x - z"
equalities = ["x * exp(y)", "x"]
start = [0.3, 0.2, 1.0]
reference_point = [0.0, 0.0, 1.0]
)toml"},
      {"unconstrained-sphere", R"toml(# Nearest point of the sphere to (0.6, 0, 0.8).
name = "unconstrained-sphere"
manifold = "sphere:3"
variables = ["x", "y", "z"]
objective = "(x - 0.6)^2 + y^2 + (z - 0.8)^2"
start = [0.0, 0.6, 0.8]
reference_point = [0.6, 0.0, 0.8]
)toml"},
  };
  return sources;
}

}  // namespace ralm
