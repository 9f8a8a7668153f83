#include "oscsum/window.hpp"

#include <cmath>
#include <sstream>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/quadrature.hpp"

namespace oscsum {

namespace {

using J4 = Jet<SmoothWindow::kMaxOrder>;

double value_of(double x) { return x; }
double value_of(const J4& x) { return x.value(); }

// exp(-1/x) / (exp(-1/x) + exp(-1/(1-x))): 0 for x <= 0, 1 for x >= 1.
template <class T>
T smooth_step(const T& x) {
    using std::exp;
    if (value_of(x) <= 0) return T(0.0);
    if (value_of(x) >= 1) return T(1.0);
    T a = exp(-1.0 / x), b = exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

// where the log-Gaussian drops below 1e-17
const double kLogGaussReach = std::sqrt(2 * std::log(1e17));

}  // namespace

SmoothWindow SmoothWindow::bump(double s0, double s1) {
    require(s0 > 0 && s1 > s0, "bump window: need 0 < s0 < s1");
    SmoothWindow w;
    w.kind_ = Kind::bump;
    w.s0_ = s0;
    w.s1_ = s1;
    w.scale_ = std::max(1.0, 1.0 / (s1 - s0));
    w.finish();
    return w;
}

SmoothWindow SmoothWindow::plateau(double s0, double s1, double ramp) {
    require(s0 > 0 && s1 > s0, "plateau window: need 0 < s0 < s1");
    require(ramp > 0 && 2 * ramp <= s1 - s0, "plateau window: need 0 < ramp <= (s1 - s0)/2");
    SmoothWindow w;
    w.kind_ = Kind::plateau;
    w.s0_ = s0;
    w.s1_ = s1;
    w.ramp_ = ramp;
    w.scale_ = std::max(1.0, 1.0 / ramp);
    w.finish();
    return w;
}

SmoothWindow SmoothWindow::log_gaussian(double center, double sigma) {
    require(center > 0 && sigma > 0, "log_gaussian window: need center > 0 and sigma > 0");
    SmoothWindow w;
    w.kind_ = Kind::log_gaussian;
    w.center_ = center;
    w.sigma_ = sigma;
    w.s0_ = center * std::exp(-kLogGaussReach * sigma);
    w.s1_ = center * std::exp(kLogGaussReach * sigma);
    w.scale_ = std::max(1.0, 1.0 / (sigma * center));
    w.finish();
    return w;
}

SmoothWindow SmoothWindow::indicator(double s0, double s1) {
    require(s0 > 0 && s1 > s0, "indicator window: need 0 < s0 < s1");
    SmoothWindow w;
    w.kind_ = Kind::indicator;
    w.s0_ = s0;
    w.s1_ = s1;
    w.scale_ = 1;
    w.finish();
    return w;
}

SmoothWindow SmoothWindow::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto num = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            double v = std::stod(parts.at(i), &used);
            if (used != parts[i].size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ValidationError("window spec '" + text + "': bad or missing number in field " + std::to_string(i));
        }
    };
    require(!parts.empty(), "empty window spec");
    const std::string& k = parts[0];
    if (k == "bump" && parts.size() == 3) return bump(num(1), num(2));
    if (k == "plateau" && parts.size() == 4) return plateau(num(1), num(2), num(3));
    if (k == "loggauss" && parts.size() == 3) return log_gaussian(num(1), num(2));
    if (k == "indicator" && parts.size() == 3) return indicator(num(1), num(2));
    throw ValidationError("unknown window spec '" + text +
                          "' (expected bump:s0:s1, plateau:s0:s1:ramp, loggauss:c:sigma or indicator:s0:s1)");
}

SmoothWindow SmoothWindow::scaled(double amplitude) const {
    SmoothWindow w = *this;
    w.amp_ *= amplitude;
    w.finish();
    return w;
}

SmoothWindow SmoothWindow::dilated(double f) const {
    require(f > 0, "dilated: factor must be positive");
    SmoothWindow w;
    switch (kind_) {
        case Kind::bump: w = bump(s0_ * f, s1_ * f); break;
        case Kind::plateau: w = plateau(s0_ * f, s1_ * f, ramp_ * f); break;
        case Kind::log_gaussian: w = log_gaussian(center_ * f, sigma_); break;
        case Kind::indicator: w = indicator(s0_ * f, s1_ * f); break;
    }
    return w.scaled(amp_);
}

template <class T>
T SmoothWindow::shape(const T& x, double y) const {
    using std::exp, std::log;
    if (y < s0_ || y > s1_ || amp_ == 0) return T(0.0);
    T r;
    switch (kind_) {
        case Kind::bump: {
            T u = (2.0 * x - (s0_ + s1_)) / (s1_ - s0_);
            if (std::abs(value_of(u)) >= 1) return T(0.0);
            r = exp(1.0 - 1.0 / (1.0 - u * u));
            break;
        }
        case Kind::plateau:
            if (y < s0_ + ramp_)
                r = smooth_step<T>((x - s0_) / ramp_);
            else if (y > s1_ - ramp_)
                r = smooth_step<T>((s1_ - x) / ramp_);
            else
                r = T(1.0);
            break;
        case Kind::log_gaussian: {
            T l = log(x / center_);
            r = exp(-(l * l) / (2 * sigma_ * sigma_));
            break;
        }
        case Kind::indicator: r = T(1.0); break;
    }
    return r * amp_;
}

J4 SmoothWindow::jet(double y) const { return shape(J4::variable(y), y); }

double SmoothWindow::eval(double y, int order) const {
    require(order >= 0 && order <= kMaxOrder, "window derivative order must lie in [0, 4]");
    if (order == 0) return shape(y, y);
    return jet(y).derivative(order);
}

std::vector<double> SmoothWindow::breakpoints() const {
    if (kind_ == Kind::plateau) return {s0_, s0_ + ramp_, s1_ - ramp_, s1_};
    if (kind_ == Kind::log_gaussian) return {s0_, center_, s1_};
    return {s0_, s1_};
}

void SmoothWindow::finish() {
    const int n = 4096;
    sup_.fill(0);
    for (int i = 0; i <= n; ++i) {
        double y = s0_ + (s1_ - s0_) * i / n;
        J4 j = jet(y);
        for (int k = 0; k <= kMaxOrder; ++k) sup_[k] = std::max(sup_[k], std::abs(j.derivative(k)));
    }
    if (kind_ == Kind::indicator)
        for (int k = 1; k <= kMaxOrder; ++k) sup_[k] = 0;
    for (int k = 0; k <= kMaxOrder; ++k) cj_[k] = sup_[k] / std::pow(scale_, k);

    // composite Gauss-Legendre; the windows are flat to all orders at the
    // breakpoints, so this converges far past double precision
    integral_ = 0;
    auto bp = breakpoints();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i)
        integral_ += integrate_composite([this](double y) { return cplx(jet(y).value(), 0); }, bp[i], bp[i + 1], 128, 20)
                         .real();
}

double SmoothWindow::sup_derivative(int order) const {
    require(order >= 0 && order <= kMaxOrder, "window derivative order must lie in [0, 4]");
    return sup_[order];
}

// Every stock window rises monotonically to its peak and falls back, so the
// variation is twice the peak; the log-Gaussian adds its two cut-off jumps.
double SmoothWindow::total_variation() const {
    double tv = 2 * std::abs(amp_);
    if (kind_ == Kind::log_gaussian) tv += 2 * 1e-17 * std::abs(amp_);
    return tv;
}

double SmoothWindow::integral() const { return integral_; }

std::string SmoothWindow::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::bump: os << "bump:" << s0_ << ":" << s1_; break;
        case Kind::plateau: os << "plateau:" << s0_ << ":" << s1_ << ":" << ramp_; break;
        case Kind::log_gaussian: os << "loggauss:" << center_ << ":" << sigma_; break;
        case Kind::indicator: os << "indicator:" << s0_ << ":" << s1_; break;
    }
    if (amp_ != 1) os << "*" << amp_;
    return os.str();
}

}  // namespace oscsum
