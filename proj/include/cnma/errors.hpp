#pragma once

#include <stdexcept>
#include <string>

namespace cnma {

// Unreadable or syntactically malformed input (files, CSV rows, JSON).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally invalid data or configuration (bad labels, incomplete
// multi-arm studies, non-positive standard errors, unknown references, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested quantity is not identified by the data (and the caller did not
// ask for inestimable elements to be dropped).
struct EstimabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cnma
