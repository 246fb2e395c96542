#ifndef FOVEAPANO_ERRORS_H_
#define FOVEAPANO_ERRORS_H_

#include <stdexcept>
#include <string>

namespace foveapano {

// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kDomain,
  kDimension,
  kCoverage,
  kGeometry,
  kSolver,
  kExternalGenerator,
  kIo,
  kNormalization,
  kBatch,
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace foveapano

#endif  // FOVEAPANO_ERRORS_H_
