#pragma once

#include <stdexcept>
#include <string>

namespace tinsim {

// Requested statistic is undefined because the data has (near-)zero variance.
struct degenerate_variance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical routine (quadrature, recursion) failed to converge.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too few samples for the requested estimator.
struct insufficient_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The data violates a structural assumption of the model being fitted.
struct model_mismatch_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tinsim
