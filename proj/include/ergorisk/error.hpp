#pragma once

#include <stdexcept>
#include <string>

namespace ergorisk {

/// Broad failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
    InvalidTask,         // lifting task geometry outside its domain
    InvalidParameter,    // bad algorithm / generator / config parameter
    DivisionUndefined,   // LI requested against a zero RWL
    EmptyRecording,
    MalformedInput,      // missing columns, unparsable numbers, bad ordering
    NonUniformSampling,
    EmptyDataset,
    Stratification,
    Convergence,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// True for errors caused by caller-supplied parameters rather than by data.
inline bool is_validation_error(ErrorKind k) {
    return k == ErrorKind::InvalidTask || k == ErrorKind::InvalidParameter;
}

}  // namespace ergorisk
