#pragma once

#include <stdexcept>
#include <string>

namespace xbarscale {

// Bad user input: invalid configs, malformed files, out-of-range arguments.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal consistency failure (e.g. a fabric that does not realize its ladder).
class ModelError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace xbarscale
