// Small vector helpers and the worker pool shared by all modules.
#ifndef HYBRIDQVI_NUMERIC_HPP
#define HYBRIDQVI_NUMERIC_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridqvi {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    double s = 0.0;
    for (double c : a) s += c * c;
    return std::sqrt(s);
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// y = a + s*b
inline Vec axpy(std::span<const double> a, double s, std::span<const double> b) {
    Vec y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + s * b[i];
    return y;
}

inline double sup_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Worker count for grid sweeps; capped by the HYBRIDQVI_THREADS env var.
int worker_count();

// Runs fn(i) for i in [0, n), chunked across workers. Falls back to a serial
// loop for small n. fn must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hybridqvi

#endif
