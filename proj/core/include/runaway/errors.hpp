#pragma once

#include <stdexcept>
#include <string>

namespace runaway {

// Invalid user-supplied parameters (grid shape, config file contents).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Moments requested from a distribution with nonpositive mass.
class DegenerateStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operands defined on different velocity grids.
class GridMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Integrator abort: NaN/Inf, T <= 0, regrid mass loss.
class RuntimeAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fit window too small or degenerate.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace runaway
