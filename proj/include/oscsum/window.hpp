#pragma once

#include <array>
#include <string>
#include <vector>

#include "oscsum/jet.hpp"

namespace oscsum {

// Compactly supported weights V(y) with derivatives up to order 4.
//
//  bump          exp(1 - 1/(1-u^2)) on the support, peak 1 at the midpoint
//  plateau       equal to 1 on [s0+ramp, s1-ramp], smooth steps on either side
//  log_gaussian  exp(-log(y/c)^2 / (2 sigma^2)), cut where it drops below 1e-17
//  indicator     1 on [s0, s1]; derivatives are reported as 0 (jumps are
//                accounted for in total_variation only)
class SmoothWindow {
public:
    enum class Kind { bump, plateau, log_gaussian, indicator };
    static constexpr int kMaxOrder = 4;

    static SmoothWindow bump(double s0, double s1);
    static SmoothWindow plateau(double s0, double s1, double ramp);
    static SmoothWindow log_gaussian(double center, double sigma);
    static SmoothWindow indicator(double s0, double s1);
    // Parses "bump:1:2", "plateau:1:2:0.25", "loggauss:1.5:0.1", "indicator:1:2".
    static SmoothWindow parse(const std::string& text);

    SmoothWindow scaled(double amplitude) const;       // multiplies values
    SmoothWindow dilated(double factor) const;          // V(y / factor)

    double operator()(double y) const { return eval(y, 0); }
    double eval(double y, int order) const;
    Jet<kMaxOrder> jet(double y) const;  // Taylor coefficients at y, zero off support

    Kind kind() const { return kind_; }
    double s0() const { return s0_; }
    double s1() const { return s1_; }
    double amplitude() const { return amp_; }
    double center() const { return center_; }   // log_gaussian only
    double sigma() const { return sigma_; }     // log_gaussian only
    bool smooth() const { return kind_ != Kind::indicator; }
    // Points where the window is not smooth or changes shape; quadrature
    // panels are aligned to these.
    std::vector<double> breakpoints() const;

    // Derivative scale and the constants C_j with sup |V^{(j)}| <= C_j scale^j.
    double derivative_scale() const { return scale_; }
    const std::array<double, kMaxOrder + 1>& derivative_constants() const { return cj_; }
    // sup |V^{(j)}| measured on a dense grid
    double sup_derivative(int order) const;

    // Total variation on the real line, jumps at the ends included.
    double total_variation() const;
    double integral() const;
    std::string describe() const;

private:
    void finish();
    template <class T>
    T shape(const T& x, double y) const;

    Kind kind_ = Kind::bump;
    double s0_ = 1, s1_ = 2, ramp_ = 0, center_ = 1, sigma_ = 1;
    double amp_ = 1;
    double scale_ = 1;
    std::array<double, kMaxOrder + 1> cj_{};
    std::array<double, kMaxOrder + 1> sup_{};
    double integral_ = 0;
};

}  // namespace oscsum
