#pragma once

#include <stdexcept>
#include <string>

namespace mpes {

/// Non-finite values in a field handed to a public operation.
class DataIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Physical parameters outside their admissible range.
class ParameterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A diagnostic relation could not be evaluated because its precondition
/// does not hold (e.g. omega requested for an unprojected velocity).
class ConstraintError : public std::runtime_error {
public:
    ConstraintError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Time integration produced a non-finite or runaway state.
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// Invalid run configuration. `key` names the offending entry when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace mpes
