#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qres {

// Root of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// A value lies outside its admissible interval (e.g. an input not in [0,1]).
class RangeError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ConfigError : public Error {
public:
    ConfigError(std::string field_path, const std::string& message)
        : Error(field_path.empty() ? message : field_path + ": " + message),
          field_path_(std::move(field_path)) {}

    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class RankDeficiencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& message)
        : Error("diverged at step " + std::to_string(step) + ": " + message), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class UndefinedSnrError : public Error {
public:
    using Error::Error;
};

}  // namespace qres
