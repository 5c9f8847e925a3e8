#ifndef SAL_ERRORS_HPP
#define SAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sal {

// All recoverable failures surface as Error. The code string is stable and
// machine-readable; the CLI prints it as `error: {"code":...,"message":...}`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline void require(bool cond, const char* code, const std::string& message) {
  if (!cond) throw Error(code, message);
}

}  // namespace sal

#endif
