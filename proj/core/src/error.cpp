#include "rsf/error.hpp"

namespace rsf {

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code), message_(message) {}

void Error::attach_step(std::size_t step) {
  message_ = "step " + std::to_string(step) + ": " + message_;
  step_ = step;
}

}  // namespace rsf
