#ifndef PARFIT_ERRORS_HPP
#define PARFIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace parfit {

// All library failures surface as Error; the message starts with a stable
// kebab-case code ("invalid-range: ...") so callers can match on it.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  Error(const std::string& code, const std::string& detail)
      : std::runtime_error(code + ": " + detail) {}
};

} // namespace parfit

#endif
