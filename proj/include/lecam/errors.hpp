#pragma once

#include <stdexcept>
#include <string>

namespace lecam {

/// Malformed or inconsistent configuration input. The message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its stated tolerance or a sampler's
/// dominating bound was violated.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lecam
