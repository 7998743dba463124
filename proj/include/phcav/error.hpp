#pragma once

#include <stdexcept>
#include <string>

namespace phcav
{

/// Malformed or missing input (config keys, file schemas, violated preconditions).
/// The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A computation that was set up correctly but could not produce a result.
/// The CLI maps it to exit code 3.
class ComputeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace phcav
