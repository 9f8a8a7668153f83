#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <thread>
#include <type_traits>
#include <vector>

namespace oscsum {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e(x) = exp(2 pi i x). Reduces x first so large arguments stay accurate.
inline cplx e(double x) {
    double f = x - std::nearbyint(x);
    return {std::cos(kTwoPi * f), std::sin(kTwoPi * f)};
}

// Neumaier compensated summation.
template <class T>
class Accumulator {
public:
    void add(T x) {
        if constexpr (std::is_same_v<T, cplx>) {
            re_.add(x.real());
            im_.add(x.imag());
        } else {
            T t = sum_ + x;
            if (std::abs(sum_) >= std::abs(x))
                comp_ += (sum_ - t) + x;
            else
                comp_ += (x - t) + sum_;
            sum_ = t;
        }
    }
    T value() const {
        if constexpr (std::is_same_v<T, cplx>)
            return {re_.value(), im_.value()};
        else
            return sum_ + comp_;
    }

private:
    struct Empty {};
    using Inner = std::conditional_t<std::is_same_v<T, cplx>, Accumulator<double>, Empty>;
    T sum_{};
    T comp_{};
    [[no_unique_address]] Inner re_{};
    [[no_unique_address]] Inner im_{};
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is handed out by
// index; callers write results into per-index slots so output order never
// depends on the thread count.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

unsigned default_threads();

// Ordinary least squares y = a + b x. Returns {b, a, stderr(b)}.
struct LineFit {
    double slope = 0, intercept = 0, slope_stderr = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oscsum
