#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ralm/alm.hpp"
#include "ralm/error.hpp"
#include "ralm/problem.hpp"

namespace ralm {

/// A problem file or builtin could not be found, read or validated.
class LoadError : public Error {
 public:
  using Error::Error;
};

namespace toml {

/// Value of the small TOML subset used by problem files: numbers, booleans,
/// basic strings and (possibly multi-line) arrays.
struct Value {
  enum class Kind { Number, Bool, String, Array };
  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string string;
  std::vector<Value> items;
  int line = 0;
  int column = 0;
};

using Table = std::map<std::string, Value>;
/// Section name -> table; the root table is "".
using Document = std::map<std::string, Table>;

/// Throws LoadError with "<source>:<line>:<column>: ..." positions.
Document parse(std::string_view text, const std::string& source);

}  // namespace toml

/// Optional AlmConfig overrides from a `[solver]` section.
struct SolverOverrides {
  std::optional<double> tau, gamma, lambda_min, lambda_max, mu_max, rho1, eps0, eps_factor,
      kkt_tol, feas_tol;
  std::optional<std::vector<double>> eps_fixed;
  std::optional<int> max_outer;

  void apply(alm::AlmConfig& cfg) const;
};

struct ProblemFile {
  Problem problem;
  std::optional<Vec> start;
  /// A point of interest for certification (e.g. the known solution).
  std::optional<Vec> reference_point;
  SolverOverrides solver;
  /// Path or "builtin:<name>".
  std::string source;
};

ProblemFile parse_problem_file(std::string_view text, const std::string& source);

/// `ref` is a path to an existing file, or a builtin name looked up first in
/// the ':'-separated directories of RALM_BUILTIN_DIR (<name>.toml) and then in
/// the compiled-in registry.
ProblemFile load_problem(const std::string& ref);

/// Compiled-in fixtures as (name, file text), in registry order.
const std::vector<std::pair<std::string, std::string>>& builtin_sources();

/// Names of every builtin, compiled-in first, then RALM_BUILTIN_DIR entries.
std::vector<std::string> list_builtins();

/// Start point normalized onto the manifold; a fixed default when absent.
Point start_point(const ProblemFile& pf);

}  // namespace ralm
