#pragma once

#include <stdexcept>
#include <string>

namespace fracbound {

// Invalid arguments, preconditions, or malformed requests. CLI exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Corrupt or inconsistent persisted data. CLI exit code 3.
class IntegrityError : public std::runtime_error {
public:
    explicit IntegrityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Persisted data written by an incompatible schema version. CLI exit code 3.
class VersionError : public IntegrityError {
public:
    explicit VersionError(const std::string& msg) : IntegrityError(msg) {}
};

// Resource exhaustion (memory, threads, disk). CLI exit code 4.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fracbound
