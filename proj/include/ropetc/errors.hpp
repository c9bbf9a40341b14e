#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ropetc {

enum class errc {
  exponent_overflow,
  division_by_zero,
  negative_input,
  argument_too_large,
  precision_mismatch,
  shape_mismatch,
  zero_row_sum,
  zero_variance,
  width_mismatch,
  incomparable_parallel_costs,
  unknown_kind,
  parse_error,
  length_condition_violated,
  missing_assignment,
  unknown_operator,
  invalid_value,
  format_error,
  io_error,
};

inline const char* to_string(errc k)
{
  switch (k) {
    case errc::exponent_overflow: return "exponent_overflow";
    case errc::division_by_zero: return "division_by_zero";
    case errc::negative_input: return "negative_input";
    case errc::argument_too_large: return "argument_too_large";
    case errc::precision_mismatch: return "precision_mismatch";
    case errc::shape_mismatch: return "shape_mismatch";
    case errc::zero_row_sum: return "zero_row_sum";
    case errc::zero_variance: return "zero_variance";
    case errc::width_mismatch: return "width_mismatch";
    case errc::incomparable_parallel_costs: return "incomparable_parallel_costs";
    case errc::unknown_kind: return "unknown_kind";
    case errc::parse_error: return "parse_error";
    case errc::length_condition_violated: return "length_condition_violated";
    case errc::missing_assignment: return "missing_assignment";
    case errc::unknown_operator: return "unknown_operator";
    case errc::invalid_value: return "invalid_value";
    case errc::format_error: return "format_error";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Domain error carrying a stable machine-readable kind. The CLI prints
/// these as "error: <kind>: <message>" and exits with status 1.
class domain_error : public std::runtime_error {
public:
  domain_error(errc kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind)
  {
  }

  errc kind() const noexcept { return kind_; }

private:
  errc kind_;
};

/// Parse failure with the byte offset into the input and the token set
/// that would have been accepted at that position.
class parse_error : public domain_error {
public:
  parse_error(std::size_t offset, std::string expected, std::string found,
              errc kind = errc::parse_error)
      : domain_error(kind, "at byte " + std::to_string(offset) + ": expected " +
                               expected + ", found " + found),
        offset_(offset),
        expected_(std::move(expected)),
        found_(std::move(found))
  {
  }

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

private:
  std::size_t offset_;
  std::string expected_;
  std::string found_;
};

} // namespace ropetc
