#include "wg/stats.hpp"

#include <cmath>

#include "wg/error.hpp"

namespace wg {

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t h = xs.size() / 2;
    return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

MeanEstimate batch_means(std::span<const double> xs, std::size_t batches) {
    MeanEstimate e;
    e.samples = xs.size();
    if (xs.empty()) return e;
    e.mean = pairwise_sum(xs) / static_cast<double>(xs.size());
    batches = std::min(batches, xs.size());
    e.batches = batches;
    if (batches < 2) return e;
    std::vector<double> means(batches);
    std::size_t start = 0;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t len = xs.size() / batches + (b < xs.size() % batches ? 1 : 0);
        means[b] = pairwise_sum(xs.subspan(start, len)) / static_cast<double>(len);
        start += len;
    }
    double m = pairwise_sum(means) / static_cast<double>(batches), ss = 0.0;
    for (double v : means) ss += (v - m) * (v - m);
    e.stderr_ = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
    return e;
}

double student_t975(std::size_t dof) {
    static const double table[] = {0,      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365,
                                   2.306,  2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131,
                                   2.120,  2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069,
                                   2.064,  2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof == 0) throw DomainError("t quantile needs at least one degree of freedom");
    if (dof <= 30) return table[dof];
    return 1.959964 + 2.4 / static_cast<double>(dof);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    LinearFit f;
    f.points = x.size();
    if (x.size() != y.size()) throw DomainError("fit inputs differ in length");
    if (x.size() < 3) return f;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) return f;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    const double t = student_t975(x.size() - 2);
    f.ci95_low = f.slope - t * f.slope_stderr;
    f.ci95_high = f.slope + t * f.slope_stderr;
    f.valid = true;
    return f;
}

}  // namespace wg
