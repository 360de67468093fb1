#include "core/error.hpp"

namespace radarcal {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::bad_magic: return "bad magic";
    case Errc::truncated: return "truncated payload";
    case Errc::trailing_data: return "trailing data";
    case Errc::non_finite: return "non-finite value";
    case Errc::bad_dimensions: return "bad dimensions";
    case Errc::bad_header: return "bad header";
    case Errc::parse: return "parse error";
    case Errc::missing_index: return "missing frame index";
    case Errc::duplicate_index: return "duplicate frame index";
    case Errc::length_mismatch: return "length mismatch";
    case Errc::out_of_range: return "out of range";
    case Errc::degenerate_training: return "degenerate training data";
    case Errc::insufficient_data: return "insufficient data";
    case Errc::undefined_correlation: return "undefined correlation";
    case Errc::malformed: return "malformed file";
    case Errc::version_mismatch: return "version mismatch";
    case Errc::gain_not_positive: return "gain not positive";
    case Errc::io: return "i/o error";
  }
  return "unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace radarcal
