#include "oodzoo/error.hpp"

namespace oodzoo {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MagicMismatch: return "MagicMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::DimOverflow: return "DimOverflow";
    case Errc::IoError: return "IoError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::MissingSplit: return "MissingSplit";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::DuplicateModelName: return "DuplicateModelName";
    case Errc::UnreadableMatrix: return "UnreadableMatrix";
    case Errc::EmptyVector: return "EmptyVector";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::ZeroNormVector: return "ZeroNormVector";
    case Errc::MissingInput: return "MissingInput";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ModelOrderMismatch: return "ModelOrderMismatch";
    case Errc::PValueOutOfRange: return "PValueOutOfRange";
    case Errc::DivisionByZeroGuard: return "DivisionByZeroGuard";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace oodzoo
