#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "cli.hpp"
#include "oscsum/charsums.hpp"
#include "oscsum/coefficients.hpp"
#include "oscsum/delta.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/experiments.hpp"
#include "oscsum/voronoi.hpp"

namespace py = pybind11;
using namespace oscsum;

namespace {

py::dict voronoi_dict(const VoronoiResult& r) {
    py::dict d;
    d["lhs"] = r.lhs;
    d["rhs"] = r.rhs;
    d["gap"] = r.gap;
    d["dual_terms"] = r.truncation.dual_terms;
    d["doubling_change"] = r.truncation.doubling_change;
    d["convention"] = std::string(to_string(r.convention));
    return d;
}

VoronoiCase make_case(i64 a, i64 q, double X, const SmoothWindow& w, i64 r) {
    VoronoiCase c;
    c.a = a;
    c.q = q;
    c.X = X;
    c.r = r;
    c.window = w;
    return c;
}

CharSumParams charsum_params(i64 n1, i64 m, i64 mp, i64 q1, i64 q2, i64 q2p, i64 r, i64 nt) {
    CharSumParams p;
    p.n1 = n1;
    p.m = m;
    p.mp = mp;
    p.q1 = q1;
    p.q2 = q2;
    p.q2p = q2p;
    p.r = r;
    p.nt = nt;
    return p;
}

py::dict sum_dict(const SumResult& s) {
    py::dict d;
    d["N"] = s.N;
    d["t"] = s.t;
    d["value"] = s.value;
    d["trivial_mass"] = s.trivial_mass;
    d["ratio"] = s.ratio;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical kernels for twisted GL(3) x GL(2) exponential sums";
    m.attr("__version__") = OSCSUM_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<CertificateError>(m, "CertificateError", PyExc_ArithmeticError);

    py::class_<SmoothWindow>(m, "Window")
        .def_static("bump", &SmoothWindow::bump, py::arg("s0"), py::arg("s1"))
        .def_static("plateau", &SmoothWindow::plateau, py::arg("s0"), py::arg("s1"), py::arg("ramp"))
        .def_static("log_gaussian", &SmoothWindow::log_gaussian, py::arg("center"), py::arg("sigma"))
        .def_static("indicator", &SmoothWindow::indicator, py::arg("s0"), py::arg("s1"))
        .def_static("parse", &SmoothWindow::parse, py::arg("text"))
        .def("__call__", [](const SmoothWindow& w, double y) { return w(y); })
        .def("derivative", &SmoothWindow::eval, py::arg("y"), py::arg("order"))
        .def("scaled", &SmoothWindow::scaled)
        .def("dilated", &SmoothWindow::dilated)
        .def_property_readonly("support", [](const SmoothWindow& w) { return py::make_tuple(w.s0(), w.s1()); })
        .def("integral", &SmoothWindow::integral)
        .def("total_variation", &SmoothWindow::total_variation)
        .def("__repr__", &SmoothWindow::describe);

    // coefficients
    py::class_<GL2Form, std::shared_ptr<GL2Form>>(m, "GL2Form")
        .def_readonly("id", &GL2Form::id)
        .def_readonly("weight", &GL2Form::weight)
        .def_readonly("limit", &GL2Form::limit)
        .def("coefficient",
             [](const GL2Form& f, i64 n) {
                 require(n >= 1 && n <= f.limit, "coefficient: n outside the table");
                 return py::int_(py::str(to_string(f.raw.at(std::size_t(n)))));
             })
        .def("hecke_eigenvalue", &GL2Form::lambda, py::arg("n"));
    m.def("delta_form", [](i64 limit) { return std::make_shared<GL2Form>(build_gl2_delta(limit)); },
          py::arg("limit"), "Coefficients of the weight-12 discriminant form up to `limit`.");

    py::class_<GL3Form>(m, "GL3Form")
        .def_readonly("limit", &GL3Form::limit)
        .def("A", &GL3Form::A, py::arg("n1"), py::arg("n2"));
    m.def("symmetric_square", &build_gl3_sym_square, py::arg("form"), py::arg("limit"));
    m.def("hecke_violations", [](const GL2Form& f, i64 bound) { return hecke_report_exact(f, bound).size(); },
          py::arg("form"), py::arg("bound"));

    // character sums
    m.def("kloosterman", py::overload_cast<i64, i64, i64>(&kloosterman), py::arg("m"), py::arg("n"), py::arg("c"));
    m.def("ramanujan_sum", &ramanujan_sum, py::arg("n"), py::arg("q"));
    m.def("frak_c", &frak_c, py::arg("n1"), py::arg("n2"), py::arg("m"), py::arg("q"), py::arg("r"));
    m.def(
        "frak_k",
        [](i64 n1, i64 m_, i64 mp, i64 q1, i64 q2, i64 q2p, i64 r, i64 nt) {
            return frak_k(charsum_params(n1, m_, mp, q1, q2, q2p, r, nt));
        },
        py::kw_only(), py::arg("n1") = 1, py::arg("m") = 0, py::arg("mp") = 0, py::arg("q1") = 1, py::arg("q2") = 1,
        py::arg("q2p") = 1, py::arg("r") = 1, py::arg("nt") = 0);

    // identities
    m.def(
        "gl2_voronoi",
        [](const GL2Form& f, i64 a, i64 q, double X, const SmoothWindow& w) {
            return voronoi_dict(gl2_voronoi_check(f, make_case(a, q, X, w, 1)));
        },
        py::arg("form"), py::arg("a"), py::arg("q"), py::arg("X"), py::arg("window"));
    m.def(
        "gl3_voronoi",
        [](const GL3Form& pi, i64 a, i64 q, i64 r, const SmoothWindow& w) {
            return voronoi_dict(gl3_voronoi_check(pi, make_case(a, q, 1, w, r)));
        },
        py::arg("form"), py::arg("a"), py::arg("q"), py::arg("r"), py::arg("window"));

    py::class_<DeltaExpansion>(m, "DeltaExpansion")
        .def(py::init<double, const SmoothWindow&>(), py::arg("Q"), py::arg("window"))
        .def("detect", [](const DeltaExpansion& d, i64 n) { return delta_detect(n, d); })
        .def(
            "detect_range",
            [](const DeltaExpansion& d, i64 lo, i64 hi, unsigned threads) { return delta_detect_range(lo, hi, d, threads); },
            py::arg("lo"), py::arg("hi"), py::arg("threads") = 1)
        .def("g", &DeltaExpansion::g, py::arg("q"), py::arg("z"))
        .def_property_readonly("max_abs_n", &DeltaExpansion::max_abs_n)
        .def_property_readonly("moduli", &DeltaExpansion::moduli);

    // experiments
    m.def(
        "twisted_sum",
        [](const GL2Form& f, const GL3Form& pi, const std::string& phase, double N, const SmoothWindow& V,
           unsigned threads) { return sum_dict(twisted_sum(f, pi, PhaseFamily::parse(phase), N, V, 0, threads)); },
        py::arg("form"), py::arg("lift"), py::arg("phase"), py::arg("N"), py::arg("window"), py::arg("threads") = 1);

    // the command line, in process
    m.def(
        "run",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "oscsum");
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one oscsum command line. Returns (exit_code, stdout, stderr).");
}
