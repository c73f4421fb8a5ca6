// error.hpp — Exception types shared by all modules

#pragma once

#include <stdexcept>
#include <string>

namespace duoatom {

// Base class; `kind()` is the machine-readable tag the CLI reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

struct ConfigError : Error {
    ConfigError(const std::string& what, int line = 0)
        : Error("config", line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line(line) {}
    int line;
};

struct IntegrationError : Error {
    explicit IntegrationError(const std::string& what) : Error("integration", what) {}
};

// Fock truncation too small for the requested run.
struct TruncationError : Error {
    explicit TruncationError(const std::string& what) : Error("truncation", what) {}
};

struct AdiabaticityError : Error {
    explicit AdiabaticityError(const std::string& what) : Error("adiabaticity", what) {}
};

struct ResolutionError : Error {
    explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

} // namespace duoatom
