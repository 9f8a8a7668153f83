#include "oscsum/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

namespace oscsum {

namespace {

struct Panel {
    double a, b;
    cplx value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<cplx(double)>& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    using boost::math::quadrature::gauss;
    // Boost lists the nonnegative nodes starting at 0; Gauss nodes are the
    // odd-indexed Kronrod nodes.
    static const auto& xk = gauss_kronrod<double, 15>::abscissa();
    static const auto& wk = gauss_kronrod<double, 15>::weights();
    static const auto& wg = gauss<double, 7>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx f0 = f(c);
    cplx k = wk[0] * f0, g = wg[0] * f0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        cplx s = f(c - h * xk[i]) + f(c + h * xk[i]);
        k += wk[i] * s;
        if (i % 2 == 0) g += wg[i / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

void split_by_phase(const std::function<double(double)>& phase, double a, double b, double step,
                    std::vector<double>& out, int depth) {
    const double m = 0.5 * (a + b);
    const double pa = phase(a), pm = phase(m), pb = phase(b);
    const bool ok = std::abs(pb - pa) <= step && std::abs(pm - pa) <= step && std::abs(pb - pm) <= step;
    if (ok || depth > 60 || b - a <= 1e-15 * std::max(1.0, std::abs(a))) {
        out.push_back(b);
        return;
    }
    split_by_phase(phase, a, m, step, out, depth + 1);
    split_by_phase(phase, m, b, step, out, depth + 1);
}

}  // namespace

QuadResult integrate_adaptive(const std::function<cplx(double)>& f, double a, double b, const QuadOptions& opt,
                              const std::function<double(double)>& phase, const std::vector<double>& breaks) {
    require(opt.tol >= 1e-13 && opt.tol <= 1e-3, "integrate: tol must lie in [1e-13, 1e-3]");
    require(std::isfinite(a) && std::isfinite(b), "integrate: endpoints must be finite");
    if (a == b) return {};
    if (b < a) {
        QuadResult r = integrate_adaptive(f, b, a, opt, phase, breaks);
        r.value = -r.value;
        return r;
    }

    std::vector<double> cuts{a};
    for (double x : breaks)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<double> edges{a};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (phase)
            split_by_phase(phase, cuts[i], cuts[i + 1], opt.max_phase_step, edges, 0);
        else
            edges.push_back(cuts[i + 1]);
        if (edges.size() > opt.max_panels) {
            std::ostringstream os;
            os.precision(17);
            os << "integrate: panel budget " << opt.max_panels << " exhausted while resolving the phase on ["
               << cuts[i] << ", " << cuts[i + 1] << "]";
            throw CertificateError(os.str());
        }
    }

    std::priority_queue<Panel> heap;
    double err = 0;
    Accumulator<cplx> total;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p = gk15(f, edges[i], edges[i + 1]);
        err += p.error;
        total.add(p.value);
        heap.push(p);
    }
    cplx running = total.value();
    std::size_t count = heap.size(), since = 0;
    while (err > opt.tol * (1 + std::abs(running))) {
        Panel worst = heap.top();
        if (count + 1 > opt.max_panels || worst.b - worst.a <= 1e-14 * (b - a)) {
            std::ostringstream os;
            os.precision(17);
            os << "integrate: could not reach tol " << opt.tol << " (error " << err << ") within " << opt.max_panels
               << " panels; worst subinterval [" << worst.a << ", " << worst.b << "]";
            throw CertificateError(os.str());
        }
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        Panel l = gk15(f, worst.a, m), r = gk15(f, m, worst.b);
        err += l.error + r.error - worst.error;
        running += l.value + r.value - worst.value;
        heap.push(l);
        heap.push(r);
        ++count;
        if (++since == 512) {
            // refresh the running totals so drift cannot stall termination
            since = 0;
            err = 0;
            auto copy = heap;
            while (!copy.empty()) {
                err += copy.top().error;
                copy.pop();
            }
        }
    }

    // Final reduction in left-to-right order: the result does not depend on
    // the order panels were refined in.
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    Accumulator<cplx> sum;
    double e = 0;
    for (const auto& p : all) {
        sum.add(p.value);
        e += p.error;
    }
    return {sum.value(), e, all.size()};
}

const GaussRule& gauss_legendre(int n) {
    require(n >= 1 && n <= 512, "gauss_legendre: node count must lie in [1, 512]");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), pp = 0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * pp * pp);
    }
    return cache.emplace(n, std::move(r)).first->second;
}

cplx integrate_composite(const std::function<cplx(double)>& f, double a, double b, int panels, int n) {
    require(panels >= 1, "integrate_composite: need at least one panel");
    const GaussRule& g = gauss_legendre(n);
    const double h = (b - a) / panels;
    Accumulator<cplx> acc;
    for (int p = 0; p < panels; ++p) {
        const double c = a + (p + 0.5) * h;
        cplx s = 0;
        for (int i = 0; i < n; ++i) s += g.w[i] * f(c + 0.5 * h * g.x[i]);
        acc.add(0.5 * h * s);
    }
    return acc.value();
}

}  // namespace oscsum
