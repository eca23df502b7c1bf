#include "permguard/error.hpp"

namespace permguard {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::TruncatedInput: return "TruncatedInput";
    case Errc::StringIndexOutOfRange: return "StringIndexOutOfRange";
    case Errc::XmlSyntax: return "XmlSyntax";
    case Errc::NotAnArchive: return "NotAnArchive";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::IoFailure: return "IoFailure";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::AllZeroCounts: return "AllZeroCounts";
    case Errc::FeatureIndexOutOfRange: return "FeatureIndexOutOfRange";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::InsufficientClassMembers: return "InsufficientClassMembers";
    case Errc::SingleClassCorpus: return "SingleClassCorpus";
    case Errc::DegenerateDimension: return "DegenerateDimension";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::OneClassOnly: return "OneClassOnly";
    case Errc::NoEvaluableClass: return "NoEvaluableClass";
    case Errc::NoBenignRows: return "NoBenignRows";
    case Errc::NTooLarge: return "NTooLarge";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::NoQualifyingFamily: return "NoQualifyingFamily";
    case Errc::SpecInvalid: return "SpecInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory error_category(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader:
    case Errc::TruncatedInput:
    case Errc::StringIndexOutOfRange:
    case Errc::XmlSyntax:
    case Errc::NotAnArchive:
    case Errc::EmptyCorpus:
    case Errc::IoFailure:
    case Errc::SchemaViolation:
    case Errc::DuplicateId:
    case Errc::KindMismatch:
    case Errc::SpecInvalid:
      return ErrorCategory::Data;
    case Errc::InvalidArgument:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Runtime;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace permguard
