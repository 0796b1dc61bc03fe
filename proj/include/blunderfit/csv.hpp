#pragma once

#include <istream>
#include <optional>
#include <string>

#include "blunderfit/fitting.hpp"

namespace blunderfit {

/// Reads measurement CSV: header `id,y,sigma,x1,...,xp`, one measurement per
/// row, `#`-prefixed comment lines ignored, decimal-point floats only.
///
/// With poly_degree set the expected header is `id,y,sigma,x` and each design
/// row is expanded to 1, x, x^2, ..., x^degree.
///
/// `source` labels errors (typically the file name). Throws ParseError with
/// the offending line number; dataset-level violations (duplicate ids,
/// non-positive sigma, ...) surface as std::invalid_argument naming the row.
Dataset read_csv(std::istream& in, const std::string& source,
                 std::optional<int> poly_degree = std::nullopt);

Dataset read_csv_file(const std::string& path,
                      std::optional<int> poly_degree = std::nullopt);

}  // namespace blunderfit
