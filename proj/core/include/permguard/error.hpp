#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace permguard {

/// Every failure the library reports carries one of these codes. The CLI maps
/// them onto exit statuses through error_category().
enum class Errc {
  // axml
  MalformedHeader,
  TruncatedInput,
  StringIndexOutOfRange,
  XmlSyntax,
  NotAnArchive,
  // dataset
  EmptyCorpus,
  IoFailure,
  SchemaViolation,
  DuplicateId,
  // featsel
  AllZeroCounts,
  FeatureIndexOutOfRange,
  KTooLarge,
  InsufficientClassMembers,
  // models
  SingleClassCorpus,
  DegenerateDimension,
  DimensionMismatch,
  KindMismatch,
  // eval
  EmptyMatrix,
  OneClassOnly,
  NoEvaluableClass,
  // experiments
  NoBenignRows,
  NTooLarge,
  InsufficientSamples,
  NoQualifyingFamily,
  // synth
  SpecInvalid,
  // generic
  InvalidArgument,
};

enum class ErrorCategory { Data, Runtime, Usage };

std::string_view to_string(Errc code) noexcept;
ErrorCategory error_category(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace permguard
