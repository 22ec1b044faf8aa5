#ifndef UAD_CORE_ERROR_HPP
#define UAD_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace uad {

/// Pipeline failure. Carries a short machine-readable kind next to the message
/// so the CLI can emit it as JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  explicit Error(const std::string& what) : Error("error", what) {}

  [[nodiscard]] const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

}  // namespace uad

#endif  // UAD_CORE_ERROR_HPP
