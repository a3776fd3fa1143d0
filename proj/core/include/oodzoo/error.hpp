#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oodzoo {

enum class Errc {
  // ingest
  MagicMismatch,
  TruncatedFile,
  NonFiniteValue,
  DimOverflow,
  IoError,
  SchemaError,
  MissingSplit,
  DimMismatch,
  DuplicateModelName,
  UnreadableMatrix,
  // scores
  EmptyVector,
  NonFiniteInput,
  EmptyClass,
  SingularCovariance,
  LabelOutOfRange,
  KTooLarge,
  ZeroNormVector,
  MissingInput,
  // pvalue / ensemble / metrics
  EmptyInput,
  ModelOrderMismatch,
  PValueOutOfRange,
  DivisionByZeroGuard,
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind of failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace oodzoo
