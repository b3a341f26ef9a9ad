#pragma once

#include <stdexcept>

namespace pfdet {

// Invalid or inconsistent user-supplied configuration.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// |det B| fell below the evaluation threshold; the objective is -inf there.
class singular_matrix_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A random generator exhausted its retry budget (degenerate configuration).
class generation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimization aborted: non-finite gradient or restart budget exhausted.
class optimization_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failed to read or write an artifact.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pfdet
