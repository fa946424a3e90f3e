#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace plrd {

//! Stable error taxonomy. Every failure surfaced by the library carries one of
//! these codes plus the pipeline stage that raised it, so callers (and the CLI)
//! can emit machine-readable errors without string matching.
enum class ErrorCode {
  invalid_argument,
  io_error,
  csv_parse,
  config_error,
  bandwidth_too_small,
  sparsity,
  degenerate_input,
  degenerate_treatment_contrast,
  deletion_infeasible,
  leverage_degenerate,
  rank_deficient,
  numerical,
  dataset_unusable,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::csv_parse: return "csv_parse";
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::bandwidth_too_small: return "bandwidth_too_small";
    case ErrorCode::sparsity: return "sparsity";
    case ErrorCode::degenerate_input: return "degenerate_input";
    case ErrorCode::degenerate_treatment_contrast: return "degenerate_treatment_contrast";
    case ErrorCode::deletion_infeasible: return "deletion_infeasible";
    case ErrorCode::leverage_degenerate: return "leverage_degenerate";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::dataset_unusable: return "dataset_unusable";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string stage, const std::string& message)
    : std::runtime_error(message)
    , code_(code)
    , stage_(std::move(stage)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }
  const char* code_name() const noexcept { return error_code_name(code_); }

private:
  ErrorCode code_;
  std::string stage_;
};

} // namespace plrd
