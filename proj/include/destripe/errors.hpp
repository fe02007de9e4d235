#pragma once

#include <stdexcept>
#include <string>

namespace destripe {

/// Tensor or operator shape mismatch. Raised whenever two objects that
/// must agree on extents do not.
class shape_error : public std::invalid_argument {
public:
    explicit shape_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid parameter value or inconsistent run configuration.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// File format violation or filesystem failure.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown: divergent iterates, non-finite values.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace destripe
