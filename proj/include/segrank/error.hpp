#pragma once

#include <stdexcept>
#include <string>

namespace segrank {

// Every failure the engine can produce carries one of these codes so that
// callers (CLI, bindings, fuzz tests) can react without string matching.
enum class Errc {
  // nifti-io
  truncated_header,
  bad_magic,
  unsupported_endianness,
  unsupported_datatype,
  dimension_mismatch,
  non_integral_label,
  negative_label,
  label_overflow,
  truncated_data,
  invalid_spacing,
  dual_file_unsupported,
  gzip_error,
  io_error,
  // metrics
  extent_mismatch,
  spacing_mismatch,
  empty_target_surface,
  // ranking / stability
  empty_input,
  incomplete_table,
  invalid_metric_value,
  missing_roi_metric_result,
  algorithm_coverage_mismatch,
  algorithm_set_mismatch,
  unknown_variant,
  // configuration
  manifest_error,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace segrank
