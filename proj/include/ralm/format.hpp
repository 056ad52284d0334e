#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ralm {

/// "%.17g" rendering; round-trips every finite double.
std::string fmt17(double x);

/// Entries joined by ';' at 17 significant digits. Empty for an empty vector.
std::string join_vec(const Eigen::VectorXd& v);

/// Inverse of join_vec; `sep` selects the separator. Throws std::invalid_argument.
Eigen::VectorXd split_vec(std::string_view text, char sep = ';');

/// Strict full-string double parse. Throws std::invalid_argument.
double parse_double(std::string_view text);

}  // namespace ralm
