#include "mapperscope/error.hpp"

namespace mapperscope {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateImageId: return "DuplicateImageId";
    case ErrorCode::UnsortedPredictions: return "UnsortedPredictions";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::MetadataMissing: return "MetadataMissing";
    case ErrorCode::MatrixMissing: return "MatrixMissing";
    case ErrorCode::MisalignedDataset: return "MisalignedDataset";
    case ErrorCode::MalformedModel: return "MalformedModel";
    case ErrorCode::UnsupportedImage: return "UnsupportedImage";
  }
  return "Unknown";
}

}  // namespace mapperscope
