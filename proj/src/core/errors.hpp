#ifndef BBR_ERRORS_HPP
#define BBR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bbr {

enum class ErrorCode {
  Io,
  MissingColumn,
  UnmappedLabel,
  InconsistentGroundTruth,
  EmptyDataset,
  AllResponsesRemoved,
  MissingBasis,
  UndefinedRatio,
  Domain,
  InvalidArgument,
  MissingPrerequisite,
  Numeric,
  Internal,
};

/// Exception carrying a stable error code plus a human-readable message.
/// The C API maps codes one-to-one onto bbr_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bbr

#endif  // BBR_ERRORS_HPP
