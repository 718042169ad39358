#ifndef POCS_CONFIG_ERROR_HPP
#define POCS_CONFIG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pocs {

// Invalid configuration; `path` names the offending field (e.g. "/solver/rho").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace pocs

#endif  // POCS_CONFIG_ERROR_HPP
