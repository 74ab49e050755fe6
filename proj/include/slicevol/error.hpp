#pragma once

#include <stdexcept>
#include <string>

namespace slicevol {

enum class Errc {
  interior_zero,
  too_few_slices,
  parse_error,
  schema_error,
  domain_error,
  inadmissible_config,
  inadmissible_edge,
  degenerate_params,
  empty_case,
  degenerate_variance,
  nonpositive_mean,
  no_convergence,
  version_mismatch,
  io_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::interior_zero: return "INTERIOR_ZERO";
    case Errc::too_few_slices: return "TOO_FEW_SLICES";
    case Errc::parse_error: return "PARSE_ERROR";
    case Errc::schema_error: return "SCHEMA_ERROR";
    case Errc::domain_error: return "DOMAIN_ERROR";
    case Errc::inadmissible_config: return "INADMISSIBLE_CONFIG";
    case Errc::inadmissible_edge: return "INADMISSIBLE_EDGE";
    case Errc::degenerate_params: return "DEGENERATE_PARAMS";
    case Errc::empty_case: return "EMPTY_CASE";
    case Errc::degenerate_variance: return "DEGENERATE_VARIANCE";
    case Errc::nonpositive_mean: return "NONPOSITIVE_MEAN";
    case Errc::no_convergence: return "NO_CONVERGENCE";
    case Errc::version_mismatch: return "VERSION_MISMATCH";
    case Errc::io_error: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace slicevol
