#pragma once

#include <stdexcept>
#include <string>

namespace crackband {

// All solver failures are typed so callers (and the CLI exit-code mapping)
// can tell configuration mistakes from genuine numerical breakdown.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Requested mode shares its eigenvalue with another cell mode.
struct DegenerateMode : Error {
    explicit DegenerateMode(const std::string& msg) : Error(msg) {}
};

// Spectral parameter hit a 1D transverse resonance: |sin k| or |sinh k| ~ 0.
struct ResonanceError : Error {
    explicit ResonanceError(const std::string& msg) : Error(msg) {}
};

// Kernel requested on its diagonal y == y'.
struct SingularPoint : Error {
    explicit SingularPoint(const std::string& msg) : Error(msg) {}
};

struct WindowUnderResolved : Error {
    explicit WindowUnderResolved(const std::string& msg) : Error(msg) {}
};

struct NoRootInBracket : Error {
    explicit NoRootInBracket(const std::string& msg) : Error(msg) {}
};

struct NonConvergence : Error {
    explicit NonConvergence(const std::string& msg) : Error(msg) {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct MalformedData : Error {
    explicit MalformedData(const std::string& msg) : Error(msg) {}
};

} // namespace crackband
