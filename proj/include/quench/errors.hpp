#pragma once

#include <stdexcept>
#include <string>

namespace quench {

// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field_path, const std::string& message)
        : std::runtime_error(field_path.empty() ? message : field_path + ": " + message), field_path_(field_path) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

// Operation invoked outside the protocol it is valid for (e.g. cluster update with a field).
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Iterative solver failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& message, double residual)
        : std::runtime_error(message), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Problem size beyond what the dense/sparse state representation supports.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input series unsuitable for a diagnostic (too few points, nonpositive values, no overlap).
class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Collapse analysis could not produce a result.
class AnalysisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace quench
