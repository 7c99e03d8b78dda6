#ifndef TECHSPACE_ERRORS_HPP
#define TECHSPACE_ERRORS_HPP

#include <stdexcept>

namespace techspace {

// Bad configuration or unreadable input; CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The data itself cannot support the requested computation; CLI exit code 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace techspace

#endif
