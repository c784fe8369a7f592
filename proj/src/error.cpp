#include "segrank/error.hpp"

namespace segrank {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::truncated_header: return "TruncatedHeader";
    case Errc::bad_magic: return "BadMagic";
    case Errc::unsupported_endianness: return "UnsupportedEndianness";
    case Errc::unsupported_datatype: return "UnsupportedDatatype";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_integral_label: return "NonIntegralLabel";
    case Errc::negative_label: return "NegativeLabel";
    case Errc::label_overflow: return "LabelOverflow";
    case Errc::truncated_data: return "TruncatedData";
    case Errc::invalid_spacing: return "InvalidSpacing";
    case Errc::dual_file_unsupported: return "DualFileUnsupported";
    case Errc::gzip_error: return "GzipError";
    case Errc::io_error: return "IoError";
    case Errc::extent_mismatch: return "ExtentMismatch";
    case Errc::spacing_mismatch: return "SpacingMismatch";
    case Errc::empty_target_surface: return "EmptyTargetSurface";
    case Errc::empty_input: return "EmptyInput";
    case Errc::incomplete_table: return "IncompleteTable";
    case Errc::invalid_metric_value: return "InvalidMetricValue";
    case Errc::missing_roi_metric_result: return "MissingRoiMetricResult";
    case Errc::algorithm_coverage_mismatch: return "AlgorithmCoverageMismatch";
    case Errc::algorithm_set_mismatch: return "AlgorithmSetMismatch";
    case Errc::unknown_variant: return "UnknownVariant";
    case Errc::manifest_error: return "ManifestError";
  }
  return "UnknownError";
}

}  // namespace segrank
