#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mapperscope {

enum class ErrorCode {
  BadMagic,
  TruncatedPayload,
  NonFiniteValue,
  IoFailure,
  MalformedLine,
  DuplicateImageId,
  UnsortedPredictions,
  BadParams,
  DimensionMismatch,
  DegenerateData,
  BadK,
  MetadataMissing,
  MatrixMissing,
  MisalignedDataset,
  MalformedModel,
  UnsupportedImage,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception. The code is the
/// machine-readable part; the message carries context such as line numbers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mapperscope
