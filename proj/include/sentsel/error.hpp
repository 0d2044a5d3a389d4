#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sentsel {

// Maps onto CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,
  kData = 2,
  kBackend = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

#define SENTSEL_DEFINE_ERROR(Name, Kind)                          \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message)                     \
        : Error(ErrorKind::Kind, #Name, message) {}               \
  };

// corpus
SENTSEL_DEFINE_ERROR(EmptyInput, kData)
SENTSEL_DEFINE_ERROR(UnknownCategory, kData)
SENTSEL_DEFINE_ERROR(MissingField, kData)
SENTSEL_DEFINE_ERROR(InvalidRatios, kUsage)
SENTSEL_DEFINE_ERROR(IoError, kData)
// alignment
SENTSEL_DEFINE_ERROR(InvalidThresholds, kUsage)
// scoring
SENTSEL_DEFINE_ERROR(InvalidChunkConfig, kUsage)
SENTSEL_DEFINE_ERROR(SingleSentenceDocument, kData)
SENTSEL_DEFINE_ERROR(NoLabeledData, kData)
// selection
SENTSEL_DEFINE_ERROR(MissingSignal, kData)
SENTSEL_DEFINE_ERROR(InvalidSelectionConfig, kUsage)
// inference
SENTSEL_DEFINE_ERROR(EmptySpecies, kData)
SENTSEL_DEFINE_ERROR(MalformedResponse, kData)
SENTSEL_DEFINE_ERROR(UnknownLabel, kData)
SENTSEL_DEFINE_ERROR(ClientError, kBackend)
// evaluation
SENTSEL_DEFINE_ERROR(LengthMismatch, kData)
SENTSEL_DEFINE_ERROR(AllZeroGains, kData)
SENTSEL_DEFINE_ERROR(DocIdMismatch, kData)

#undef SENTSEL_DEFINE_ERROR

// Schema violations carry the 1-based line of the offending record (0 when
// the error is not tied to a line).
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kData, "SchemaError",
              line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Raised by scorer backends. `chunk` is the chunk index being classified when
// the failure happened, or npos when unknown.
class BackendError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit BackendError(const std::string& message, std::size_t chunk = npos)
      : Error(ErrorKind::kBackend, "BackendError",
              chunk == npos ? message
                            : "chunk " + std::to_string(chunk) + ": " + message),
        chunk_(chunk) {}

  std::size_t chunk() const noexcept { return chunk_; }

 private:
  std::size_t chunk_;
};

}  // namespace sentsel
