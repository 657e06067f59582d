#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wg {

struct MeanEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
    std::size_t batches = 0;
};

// Batch means: samples split into `batches` contiguous blocks (sizes differ
// by at most one); stderr is the spread of block means over sqrt(batches).
MeanEstimate batch_means(std::span<const double> xs, std::size_t batches = 20);

// Pairwise (cascade) summation in fixed order.
double pairwise_sum(std::span<const double> xs);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::size_t points = 0;
    bool valid = false;  // false for < 3 points or non-finite input
};

// Ordinary least squares y = a + b x with a Student-t 95% interval on b.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// two-sided 97.5% Student-t quantile
double student_t975(std::size_t dof);

}  // namespace wg
