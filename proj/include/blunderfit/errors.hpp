#pragma once

#include <stdexcept>
#include <string>

namespace blunderfit {

/// Weighted design matrix is rank deficient.
class SingularModelError : public std::runtime_error {
public:
    SingularModelError(std::size_t rank, std::size_t param_count, const std::string& context = "")
        : std::runtime_error("singular model: design matrix rank " + std::to_string(rank) +
                             " < " + std::to_string(param_count) +
                             " parameters (column-space deficiency " +
                             std::to_string(param_count - rank) + ")" + context),
          rank_(rank),
          param_count_(param_count) {}

    std::size_t rank() const noexcept { return rank_; }
    std::size_t param_count() const noexcept { return param_count_; }

private:
    std::size_t rank_;
    std::size_t param_count_;
};

/// Too few equations for the requested fit or exclusion run.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV); message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace blunderfit
