#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "oscsum/arith.hpp"
#include "oscsum/charsums.hpp"
#include "oscsum/coefficients.hpp"
#include "oscsum/delta.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/experiments.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/oscillatory.hpp"
#include "oscsum/voronoi.hpp"

namespace oscsum::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ------------------------------------------------------------ results ----

enum class Fmt { integer, fixed, general, text };

struct Column {
    std::string name;
    Fmt fmt = Fmt::general;
    int prec = 17;
};

struct Report {
    std::string experiment;
    std::vector<Column> columns;
    std::vector<std::vector<json>> rows;
    json summary = json::object();
    json coefficients = json::object();
};

std::string format_number(double v, Fmt fmt, int prec) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    if (fmt == Fmt::fixed)
        std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    else
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    std::string s = buf;
    // a tiny negative value rounded to zero prints as -0.000...
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string cell(const json& v, const Column& c) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    if (v.is_number_integer() && c.fmt != Fmt::fixed) return v.dump();
    return format_number(v.get<double>(), c.fmt == Fmt::integer ? Fmt::general : c.fmt, c.prec);
}

std::string render_csv(const Report& rep, const json& provenance) {
    std::ostringstream os;
    os << "# provenance " << provenance.dump() << '\n';
    for (const auto& [k, v] : rep.summary.items()) os << "# " << k << ' ' << v.dump() << '\n';
    for (std::size_t i = 0; i < rep.columns.size(); ++i) os << (i ? "," : "") << rep.columns[i].name;
    os << '\n';
    for (const auto& row : rep.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i], rep.columns[i]);
        os << '\n';
    }
    return os.str();
}

std::string render_json(const Report& rep, const json& provenance) {
    json j;
    j["provenance"] = provenance;
    j["experiment"] = rep.experiment;
    j["params"] = provenance["config"]["params"];
    json rows = json::array();
    for (const auto& row : rep.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) o[rep.columns[i].name] = row[i];
        rows.push_back(std::move(o));
    }
    j["rows"] = std::move(rows);
    for (const auto& [k, v] : rep.summary.items()) j[k] = v;
    return j.dump(2) + "\n";
}

// --------------------------------------------------------- parameters ----

// Every subcommand option is registered here so the run can be echoed into
// the provenance record and replayed from it.
class Params {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& name, T& var, const std::string& help) {
        items_.push_back({name, [&var] { return json(var); }});
        return app->add_option("--" + name, var, help)->capture_default_str();
    }
    CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& help) {
        items_.push_back({name, [&var] { return json(var); }});
        return app->add_flag("--" + name, var, help);
    }
    // accepted both as a positional argument and as --name
    CLI::Option* positional(CLI::App* app, const std::string& name, std::string& var, const std::string& help) {
        items_.push_back({name, [&var] { return json(var); }});
        return app->add_option(name + ",--" + name, var, help)->required();
    }
    json echo() const {
        json j = json::object();
        for (const auto& [k, f] : items_) j[k] = f();
        return j;
    }

private:
    std::vector<std::pair<std::string, std::function<json()>>> items_;
};

std::pair<i64, i64> parse_range(const std::string& s, const char* what) {
    auto colon = s.find(':', s.empty() ? 0 : 1);
    try {
        std::size_t u1 = 0, u2 = 0;
        if (colon == std::string::npos) throw std::invalid_argument("");
        i64 lo = std::stoll(s.substr(0, colon), &u1), hi = std::stoll(s.substr(colon + 1), &u2);
        if (u1 != colon || u2 != s.size() - colon - 1) throw std::invalid_argument("");
        return {lo, hi};
    } catch (const std::exception&) {
        throw ValidationError(std::string(what) + ": expected lo:hi, got '" + s + "'");
    }
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ValidationError(std::string(what) + ": bad number '" + item + "'");
        }
    }
    return out;
}

// "linear:slope", "quadratic:T:center", "monomial:coef:power"
Phase parse_phase(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    auto num = [&](std::size_t i) {
        auto v = parse_list(parts[i], "phase");
        if (v.size() != 1) throw ValidationError("phase: bad number in '" + s + "'");
        return v[0];
    };
    if (parts.size() == 2 && parts[0] == "linear") return linear_phase(num(1));
    if (parts.size() == 3 && parts[0] == "quadratic") return quadratic_phase(num(1), num(2));
    if (parts.size() == 3 && parts[0] == "monomial") return monomial_phase(num(1), num(2));
    throw ValidationError("unknown phase '" + s + "' (linear:s, quadratic:T:c or monomial:c:p)");
}

// ------------------------------------------------------- coefficients ----

class Coefficients {
public:
    Coefficients(std::string dir, std::ostream& err) : dir_(std::move(dir)), err_(err) {}

    const std::string& dir() const { return dir_; }
    std::string gl2_path() const { return (fs::path(dir_) / "delta.gl2.csv").string(); }
    std::string gl3_path() const { return (fs::path(dir_) / "sym2-delta.gl3.csv").string(); }

    // From the cache when it reaches the limit; otherwise computed. Either way
    // the values are the same to the bit.
    std::shared_ptr<const GL2Form> gl2(i64 limit) {
        if (gl2_ && gl2_->limit >= limit) return gl2_;
        if (!dir_.empty() && fs::exists(gl2_path())) {
            auto f = std::make_shared<GL2Form>(read_gl2_cache(gl2_path()));
            if (f->limit >= limit) {
                err_ << "oscsum: coefficients from cache " << gl2_path() << '\n';
                return gl2_ = f;
            }
        }
        return gl2_ = std::make_shared<GL2Form>(build_gl2_delta(limit));
    }
    GL3Form gl3(i64 limit) { return build_gl3_sym_square(gl2(limit), limit); }

private:
    std::string dir_;
    std::ostream& err_;
    std::shared_ptr<const GL2Form> gl2_;
};

struct Context {
    Coefficients& coeffs;
    unsigned threads;
    u64 seed;
};

json source(const std::string& form, i64 limit) { return json{{"form", form}, {"limit", limit}}; }

// ------------------------------------------------------------ commands ----

struct Command {
    virtual ~Command() = default;
    CLI::App* app = nullptr;
    Params params;
    virtual Report run(Context& ctx) = 0;
    virtual json echo() const { return params.echo(); }
};

struct CoeffsCmd : Command {
    std::string form = "delta";
    i64 limit = 100;
    bool verify = false;
    explicit CoeffsCmd(CLI::App& root) {
        app = root.add_subcommand("coeffs", "Hecke coefficient tables");
        params.add(app, "form", form, "delta or sym2")->check(CLI::IsMember({"delta", "sym2"}));
        params.add(app, "limit", limit, "largest n (n1^2 n2 for sym2)");
        params.flag(app, "verify", verify, "check Hecke relations exactly before writing");
    }
    Report run(Context& ctx) override {
        require(limit >= 1, "coeffs: limit must be >= 1");
        Report rep;
        rep.experiment = "coeffs";
        rep.coefficients = source(form, limit);
        auto f = ctx.coeffs.gl2(limit);
        if (form == "delta") {
            if (verify) {
                auto bad = hecke_report_exact(*f, limit);
                if (!bad.empty())
                    throw CertificateError("coeffs: Hecke relation fails at m = " + std::to_string(bad[0].m) +
                                           ", n = " + std::to_string(bad[0].n));
            }
            rep.columns = {{"n", Fmt::integer}, {"a", Fmt::text}, {"lambda", Fmt::general}};
            for (i64 n = 1; n <= limit; ++n)
                rep.rows.push_back({n, to_string(f->raw[std::size_t(n)]), f->lambda(n)});
            return rep;
        }
        GL3Form pi = ctx.coeffs.gl3(limit);
        if (verify) {
            auto bad = hecke_report(pi);
            if (!bad.empty())
                throw CertificateError("coeffs: GL(3) multiplicativity fails at (" + std::to_string(bad[0].m) + ", " +
                                       std::to_string(bad[0].n) + ")");
        }
        rep.columns = {{"n1", Fmt::integer}, {"n2", Fmt::integer}, {"A", Fmt::general}};
        for (i64 n1 = 1; n1 * n1 <= limit; ++n1)
            for (i64 n2 = 1; n1 * n1 * n2 <= limit; ++n2) rep.rows.push_back({n1, n2, pi.A(n1, n2)});
        return rep;
    }
};

struct CharsumCmd : Command {
    std::string kind;
    i64 m = 0, n = 0, c = 1, q = 1, n1 = 1, n2 = 0, mp = 0, q1 = 1, q2 = 1, q2p = 1, r = 1, nt = 0;
    explicit CharsumCmd(CLI::App& root) {
        app = root.add_subcommand("charsum", "complete character sums");
        params.positional(app, "kind", kind, "kloosterman, ramanujan, frak_c, frak_k or frak_k_bounds")
            ->check(CLI::IsMember({"kloosterman", "ramanujan", "frak_c", "frak_k", "frak_k_bounds"}));
        params.add(app, "m", m, "first frequency");
        params.add(app, "n", n, "second frequency");
        params.add(app, "c", c, "Kloosterman modulus");
        params.add(app, "q", q, "modulus");
        params.add(app, "n1", n1, "n1");
        params.add(app, "n2", n2, "n2");
        params.add(app, "mp", mp, "m'");
        params.add(app, "q1", q1, "q1");
        params.add(app, "q2", q2, "q2");
        params.add(app, "q2p", q2p, "q2'");
        params.add(app, "r", r, "r");
        params.add(app, "nt", nt, "dual frequency of frak_k");
    }
    CharSumParams k_params() const {
        CharSumParams p;
        p.n1 = n1;
        p.n2 = n2;
        p.m = m;
        p.mp = mp;
        p.q = q;
        p.q1 = q1;
        p.q2 = q2;
        p.q2p = q2p;
        p.r = r;
        p.nt = nt;
        return p;
    }
    Report run(Context&) override {
        Report rep;
        rep.experiment = "charsum:" + kind;
        if (kind == "kloosterman") {
            require(c >= 1, "kloosterman: modulus must be >= 1");
            rep.columns = {{"value", Fmt::fixed, 10}};
            rep.rows.push_back({kloosterman(m, n, c)});
        } else if (kind == "ramanujan") {
            require(q >= 1, "ramanujan_sum: modulus must be >= 1");
            rep.columns = {{"value", Fmt::integer}};
            rep.rows.push_back({ramanujan_sum(n, q)});
        } else if (kind == "frak_c") {
            auto v = frak_c(n1, n2, m, q, r);
            rep.columns = {{"value_re", Fmt::fixed, 10}, {"value_im", Fmt::fixed, 10}};
            rep.rows.push_back({v.real(), v.imag()});
        } else if (kind == "frak_k") {
            auto v = frak_k(k_params());
            rep.columns = {{"value_re", Fmt::fixed, 10}, {"value_im", Fmt::fixed, 10}};
            rep.rows.push_back({v.real(), v.imag()});
        } else {
            auto b = frak_k_bounds(k_params());
            rep.columns = {{"value_re", Fmt::fixed, 10}, {"value_im", Fmt::fixed, 10}, {"bound_nonzero"},
                           {"bound_zero"},           {"holds_nonzero", Fmt::text},  {"holds_zero", Fmt::text}};
            rep.rows.push_back({b.value.real(), b.value.imag(), b.bound_nonzero, b.bound_zero, b.holds_nonzero,
                                b.holds_zero});
        }
        return rep;
    }
};

struct OscCmd : Command {
    std::string lemma = "integral", window = "bump:1:2", phase = "linear:50";
    double Q = 1, U = 0.25, lambda0 = 0, X = 0, lambda = 10, Y = 1, tol = 1e-9;
    int A = 3, r = 2;
    explicit OscCmd(CLI::App& root) {
        app = root.add_subcommand("osc", "oscillatory integrals and their derivative-test bounds");
        params.add(app, "lemma", lemma, "integral, first, rth, stationary or cubic")
            ->check(CLI::IsMember({"integral", "first", "rth", "stationary", "cubic"}));
        params.add(app, "window", window, "weight, e.g. bump:1:2");
        params.add(app, "phase", phase, "phase in radians: linear:s, quadratic:T:c or monomial:c:p");
        params.add(app, "Q", Q, "phase derivative scale");
        params.add(app, "U", U, "weight derivative scale");
        params.add(app, "A", A, "integration-by-parts order (first) or expansion order (stationary)");
        params.add(app, "r", r, "derivative order for the rth test");
        params.add(app, "lambda0", lambda0, "lower bound for |rho^(r)|; 0 measures it");
        params.add(app, "X", X, "cubic: frequency X");
        params.add(app, "lambda", lambda, "cubic: lambda");
        params.add(app, "Y", Y, "cubic: Y");
        params.add(app, "tol", tol, "quadrature tolerance");
    }
    Report run(Context&) override {
        Report rep;
        rep.experiment = "osc:" + lemma;
        SmoothWindow w = SmoothWindow::parse(window);
        if (lemma == "cubic") {
            auto res = cubic_phase_integral(X, lambda, Y, w, std::min(tol, 1e-11));
            rep.columns = {{"value_re"}, {"value_im"}, {"regime", Fmt::text}};
            rep.rows.push_back({res.value.real(), res.value.imag(), to_string(res.regime)});
            return rep;
        }
        Phase rho = parse_phase(phase);
        OscillatorySpec spec{w, rho, fit_params(w, rho, Q, U)};
        auto I = integrate_detailed(spec, tol);
        if (lemma == "integral") {
            rep.columns = {{"value_re"}, {"value_im"}, {"error_estimate"}};
            rep.rows.push_back({I.value.real(), I.value.imag(), I.error});
        } else if (lemma == "stationary") {
            auto sp = stationary_phase(spec, A);
            rep.columns = {{"value_re"}, {"value_im"}, {"approx_re"}, {"approx_im"}, {"y0"}, {"error_budget"},
                           {"difference"}};
            rep.rows.push_back({I.value.real(), I.value.imag(), sp.value.real(), sp.value.imag(), sp.y0,
                                sp.error_budget, std::abs(sp.value - I.value)});
        } else {
            DerivativeBound b;
            if (lemma == "first") {
                b = bound_first_derivative(spec, A);
            } else {
                double l0 = lambda0;
                if (l0 <= 0) {
                    l0 = INFINITY;
                    for (int i = 0; i <= 1024; ++i) {
                        double y = w.s0() + (w.s1() - w.s0()) * i / 1024.0;
                        l0 = std::min(l0, std::abs(eval_phase(rho, y).d[r]));
                    }
                }
                require(r >= 2 && r <= 4, "osc: r must lie in [2, 4]");
                b = bound_rth_derivative(spec, r, l0);
            }
            rep.columns = {{"value_re"}, {"value_im"}, {"abs"}, {"bound"}, {"raw"}, {"constant"}, {"holds", Fmt::text}};
            rep.rows.push_back({I.value.real(), I.value.imag(), std::abs(I.value), b.bound, b.raw, b.constant,
                                std::abs(I.value) <= b.bound});
        }
        return rep;
    }
};

struct VoronoiCmd : Command {
    std::string form = "delta", side = "both", window = "loggauss:1:0.1";
    i64 q = 1, a = 1, r = 1, limit = 0, max_dual = 0;
    double scale = 200;
    explicit VoronoiCmd(CLI::App& root) {
        app = root.add_subcommand("voronoi", "GL(2) and GL(3) Voronoi identities");
        params.add(app, "form", form, "delta or sym2")->check(CLI::IsMember({"delta", "sym2"}));
        params.add(app, "side", side, "lhs, rhs or both")->check(CLI::IsMember({"lhs", "rhs", "both"}));
        params.add(app, "q", q, "modulus");
        params.add(app, "a", a, "numerator, coprime to q");
        params.add(app, "r", r, "second index (sym2 only)");
        params.add(app, "scale", scale, "length of the sum");
        params.add(app, "window", window, "shape on the unit scale");
        params.add(app, "limit", limit, "coefficient table size; 0 picks 60000 (delta) or 40000 (sym2)");
        params.add(app, "max-dual", max_dual, "dual cutoff; 0 chooses it adaptively");
    }
    Report run(Context& ctx) override {
        Report rep;
        rep.experiment = "voronoi:" + form;
        const i64 L = limit > 0 ? limit : (form == "delta" ? 60000 : 40000);
        rep.coefficients = source(form, L);
        VoronoiCase c;
        c.a = a;
        c.q = q;
        c.r = r;
        c.max_dual = max_dual;
        SmoothWindow w = SmoothWindow::parse(window);
        VoronoiResult res;
        if (form == "delta") {
            c.X = scale;
            c.window = w;
            res = gl2_voronoi_check(*ctx.coeffs.gl2(L), c, ctx.threads);
        } else {
            c.X = 1;
            c.window = w.dilated(scale);
            res = gl3_voronoi_check(ctx.coeffs.gl3(L), c);
        }
        if (side != "rhs") {
            rep.columns.push_back({"lhs_re"});
            rep.columns.push_back({"lhs_im"});
        }
        if (side != "lhs") {
            rep.columns.push_back({"rhs_re"});
            rep.columns.push_back({"rhs_im"});
        }
        std::vector<json> row;
        if (side != "rhs") row.insert(row.end(), {res.lhs.real(), res.lhs.imag()});
        if (side != "lhs") row.insert(row.end(), {res.rhs.real(), res.rhs.imag()});
        if (side == "both") {
            rep.columns.push_back({"gap"});
            row.push_back(res.gap);
        }
        rep.rows.push_back(row);
        if (side != "lhs") {
            const auto& t = res.truncation;
            rep.summary["truncation"] = json{{"dual_terms", t.dual_terms},   {"x_max", t.x_max},
                                             {"tail_estimate", t.tail_estimate}, {"doubling_change", t.doubling_change},
                                             {"sigma", t.sigma},             {"tau_max", t.tau_max}};
            rep.summary["convention"] = to_string(res.convention);
            if (!res.note.empty()) rep.summary["note"] = res.note;
        }
        return rep;
    }
};

struct DeltaCmd : Command {
    double Q = 20, tail_tol = 1e-9;
    std::string n_range = "-50:50", window = "bump:0.5:1";
    explicit DeltaCmd(CLI::App& root) {
        app = root.add_subcommand("delta", "delta-symbol expansion");
        params.add(app, "Q", Q, "size of the moduli");
        params.add(app, "n-range", n_range, "lo:hi");
        params.add(app, "window", window, "generator window");
        params.add(app, "tail-tol", tail_tol, "discarded z-tail of g");
    }
    Report run(Context& ctx) override {
        auto [lo, hi] = parse_range(n_range, "delta: --n-range");
        require(lo <= hi, "delta: empty --n-range");
        Report rep;
        rep.experiment = "delta";
        DeltaOptions opt;
        opt.tail_tol = tail_tol;
        auto d = build_delta(Q, SmoothWindow::parse(window), opt);
        auto v = delta_detect_range(lo, hi, d, ctx.threads);
        rep.columns = {{"n", Fmt::integer}, {"value", Fmt::fixed, 6}};
        for (i64 n = lo; n <= hi; ++n) rep.rows.push_back({n, v[std::size_t(n - lo)]});
        rep.summary["expansion"] = json{{"moduli", d.moduli()},
                                        {"max_abs_n", d.max_abs_n()},
                                        {"normalization", d.normalization()},
                                        {"zeta_cut", d.zeta_cut()},
                                        {"epsilon", d.epsilon()}};
        return rep;
    }
};

struct SumCmd : Command {
    std::string phase = "log:-1:1000", window = "bump:1:2", grid = "12:18", coeffs = "genuine";
    double N = 0;
    int trials = 1;
    i64 r_cap = 0;
    bool sharp = false;
    explicit SumCmd(CLI::App& root) {
        app = root.add_subcommand("sum", "twisted sums S(N) and their cancellation exponent");
        params.add(app, "phase", phase, "log:c:t or power:c:beta:t");
        params.add(app, "window", window, "smooth weight V");
        params.add(app, "grid", grid, "dyadic exponents lo:hi; ignored when --N is set");
        params.add(app, "N", N, "a single length");
        params.add(app, "coeffs", coeffs, "genuine, one or random")
            ->check(CLI::IsMember({"genuine", "one", "random"}));
        params.add(app, "trials", trials, "random tables averaged (random only)");
        params.add(app, "r-cap", r_cap, "keep r <= r-cap; 0 keeps all");
        params.flag(app, "sharp", sharp, "sum over N <= r^2 n <= 2N instead of the smooth weight");
    }
    Report run(Context& ctx) override {
        Report rep;
        rep.experiment = "sum";
        PhaseFamily ph = PhaseFamily::parse(phase);
        SmoothWindow V = SmoothWindow::parse(window);
        std::vector<double> Ns;
        if (N > 0) {
            Ns = {N};
        } else {
            auto [lo, hi] = parse_range(grid, "sum: --grid");
            Ns = dyadic_grid(int(lo), int(hi));
        }
        require(trials >= 1, "sum: trials must be >= 1");
        const double top = *std::max_element(Ns.begin(), Ns.end());
        const i64 limit = i64(std::floor(top * (sharp ? 2.0 : V.s1())));

        auto make_table = [&](int trial) {
            if (coeffs == "one") return ProductTable::constant(limit);
            if (coeffs == "random") return ProductTable::random_signs(limit, ctx.seed + u64(trial));
            auto f = ctx.coeffs.gl2(limit);
            return ProductTable::build(*f, build_gl3_sym_square(f, limit), limit, ctx.threads);
        };
        if (coeffs == "genuine") rep.coefficients = source("delta x sym2", limit);

        std::vector<double> slopes;
        for (int k = 0; k < (coeffs == "random" ? trials : 1); ++k) {
            auto table = make_table(k);
            std::vector<SumResult> rows;
            for (double n : Ns)
                rows.push_back(sharp ? sharp_cut_sum(table, ph, n, ctx.threads)
                                     : twisted_sum(table, ph, n, V, r_cap, ctx.threads));
            if (k == 0)
                for (const auto& s : rows)
                    rep.rows.push_back({s.N, s.t, s.value.real(), s.value.imag(), s.trivial_mass, s.ratio});
            if (Ns.size() >= 5) {
                std::vector<double> x, y;
                for (const auto& s : rows) {
                    if (!(std::abs(s.value) > 0)) throw ValidationError("sum: S(N) vanishes at N = " + std::to_string(s.N));
                    x.push_back(std::log2(s.N));
                    y.push_back(std::log2(std::abs(s.value)));
                }
                auto lf = fit_line(x, y);
                if (k == 0 && trials == 1) rep.summary["fit"] = json{{"exponent", lf.slope}, {"stderr", lf.slope_stderr}};
                slopes.push_back(lf.slope);
            }
        }
        if (slopes.size() > 1) {
            double mean = 0, var = 0;
            for (double s : slopes) mean += s;
            mean /= double(slopes.size());
            for (double s : slopes) var += (s - mean) * (s - mean);
            var /= double(slopes.size() - 1);
            rep.summary["fit"] = json{{"exponent", mean}, {"stderr", std::sqrt(var / double(slopes.size()))},
                                      {"trials", slopes.size()}};
        }
        rep.columns = {{"N"}, {"t"}, {"value_re"}, {"value_im"}, {"trivial_mass"}, {"ratio"}};
        return rep;
    }
};

struct FiCmd : Command {
    double x = 1e4;
    i64 N = 10000;
    std::string grid = "10:18";
    explicit FiCmd(CLI::App& root) {
        app = root.add_subcommand("fi", "partial sums of lambda_pi(r, n) lambda_f(n) and their dual");
        params.add(app, "x", x, "length of the direct sum");
        params.add(app, "N", N, "length of the dual sum");
        params.add(app, "grid", grid, "dyadic exponents of the growth fit, lo:hi");
    }
    Report run(Context& ctx) override {
        auto [lo, hi] = parse_range(grid, "fi: --grid");
        FIOptions opt;
        opt.grid_lo = int(lo);
        opt.grid_hi = int(hi);
        require(hi >= lo + 2 && lo >= 1 && hi <= 30, "fi: --grid needs 1 <= lo, lo + 2 <= hi <= 30");
        require(x >= 0 && x <= 1e9, "fi: x must lie in [0, 1e9]");
        const i64 limit = std::max({i64(std::floor(x)), N, i64(1) << hi});
        auto f = ctx.coeffs.gl2(limit);
        auto table = ProductTable::build(*f, build_gl3_sym_square(f, limit), limit, ctx.threads);
        auto res = fi_partial_sum(table, x, N, opt);
        Report rep;
        rep.experiment = "fi";
        rep.coefficients = source("delta x sym2", limit);
        rep.columns = {{"X"}, {"block_sup"}};
        for (std::size_t i = 0; i < res.grid.size(); ++i) rep.rows.push_back({res.grid[i], res.block_sup[i]});
        rep.summary["direct"] = res.direct;
        rep.summary["dual"] = res.dual;
        rep.summary["fit"] = json{{"exponent", res.fitted_exponent}, {"stderr", res.fit_stderr}, {"convexity", 5.0 / 7}};
        return rep;
    }
};

struct CorrCmd : Command {
    CorrelationParams p;
    std::string phase = "log:-1:100", window = "bump:1:2", X = "";
    explicit CorrCmd(CLI::App& root) {
        app = root.add_subcommand("corr", "correlation integrals of the J transforms");
        params.add(app, "N0", p.N0, "N0");
        params.add(app, "N1", p.N1, "N1");
        params.add(app, "C", p.C, "size of the moduli");
        params.add(app, "r", p.r, "r");
        params.add(app, "m", p.m, "m");
        params.add(app, "mp", p.mp, "m'");
        params.add(app, "q1", p.q1, "q1");
        params.add(app, "q2", p.q2, "q2");
        params.add(app, "q2p", p.q2p, "q2'");
        params.add(app, "M", p.M, "size of m");
        params.add(app, "Q", p.Q, "delta-method Q; 0 means N0^{1/2} / t^{2/5}");
        params.add(app, "phase", phase, "log:c:t or power:c:beta:t");
        params.add(app, "window", window, "V");
        params.add(app, "X", X, "comma-separated frequencies; empty spans all regimes");
    }
    Report run(Context& ctx) override {
        p.phase = PhaseFamily::parse(phase);
        p.V = SmoothWindow::parse(window);
        if (!X.empty()) p.X_grid = parse_list(X, "corr: --X");
        auto res = correlation_integrals(p, ctx.threads);
        Report rep;
        rep.experiment = "corr";
        rep.columns = {{"X"}, {"regime", Fmt::text}, {"plus_re"}, {"plus_im"}, {"minus_re"}, {"minus_im"}, {"scaled"}};
        for (const auto& row : res.rows)
            rep.rows.push_back({row.X, to_string(row.regime), row.plus.real(), row.plus.imag(), row.minus.real(),
                                row.minus.imag(), row.scaled});
        rep.summary["scales"] = json{{"lambda", res.lambda}, {"P", res.P}, {"Q", res.Q}};
        rep.summary["admissible"] = res.admissible;
        rep.summary["violations"] = res.violations;
        rep.summary["constants"] = json{{"negligible_max", res.negligible_max},
                                        {"small_x", res.small_x_constant},
                                        {"middle", res.middle_constant},
                                        {"large_x", res.large_x_constant},
                                        {"zero", res.zero_constant},
                                        {"j", res.j_constant},
                                        {"l2", res.l2_constant},
                                        {"phi_minus_max", res.phi_minus_max},
                                        {"phi_plus", res.phi_plus_constant}};
        return rep;
    }
};

struct CacheCmd : Command {
    CLI::App *build = nullptr, *verify = nullptr;
    std::string form = "delta";
    i64 limit = 10000;
    std::size_t sample = 100;
    Params verify_params;
    explicit CacheCmd(CLI::App& root) {
        app = root.add_subcommand("cache", "coefficient cache");
        app->require_subcommand(1);
        build = app->add_subcommand("build", "write the cache file");
        verify = app->add_subcommand("verify", "recompute sampled rows and compare exactly");
        params.add(build, "form", form, "delta or sym2")->check(CLI::IsMember({"delta", "sym2"}));
        params.add(build, "limit", limit, "largest n (n1^2 n2 for sym2)");
        verify_params.add(verify, "form", form, "delta or sym2")->check(CLI::IsMember({"delta", "sym2"}));
        verify_params.add(verify, "sample", sample, "rows recomputed; 0 checks all");
    }
    json echo() const override { return build->parsed() ? params.echo() : verify_params.echo(); }
    Report run(Context& ctx) override {
        require(!ctx.coeffs.dir().empty(), "cache: no cache directory (use --cache-dir or OSCSUM_CACHE)");
        const std::string path = form == "delta" ? ctx.coeffs.gl2_path() : ctx.coeffs.gl3_path();
        Report rep;
        rep.columns = {{"form", Fmt::text}, {"file", Fmt::text}, {"rows", Fmt::integer}, {"ok", Fmt::text}};
        const std::string file = fs::path(path).filename().string();
        if (build->parsed()) {
            require(limit >= 1, "cache build: limit must be >= 1");
            fs::create_directories(ctx.coeffs.dir());
            rep.experiment = "cache:build";
            if (form == "delta") {
                write_gl2_cache(build_gl2_delta(limit), path);
            } else {
                auto f = std::make_shared<GL2Form>(build_gl2_delta(limit));
                write_gl3_cache(build_gl3_sym_square(f, limit), path);
            }
            rep.rows.push_back({form, file, limit, true});
            return rep;
        }
        rep.experiment = "cache:verify";
        require(fs::exists(path), "cache verify: no cache file " + path);
        auto v = form == "delta" ? verify_gl2_cache(path, sample, ctx.seed) : verify_gl3_cache(path, sample, ctx.seed);
        if (!v.ok)
            throw CertificateError("cache verify: " + file + ": " +
                                   (v.message.find("line") != std::string::npos
                                        ? v.message
                                        : "line " + std::to_string(v.bad_line) + ": " + v.message));
        rep.rows.push_back({form, file, v.rows_checked, true});
        return rep;
    }
};

// ---------------------------------------------------------------- run ----

std::vector<std::string> expand_config(const std::vector<std::string>& args, std::size_t at) {
    if (at + 1 >= args.size()) throw ValidationError("--config needs a file");
    std::ifstream in(args[at + 1]);
    if (!in) throw ValidationError("cannot read config file '" + args[at + 1] + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ValidationError("config file '" + args[at + 1] + "': " + e.what());
    }
    // an earlier output file works as a config too
    if (j.contains("provenance")) j = j["provenance"]["config"];
    if (!j.is_object() || !j.contains("command") || !j["command"].is_array())
        throw ValidationError("config file '" + args[at + 1] + "': expected {\"command\": [...], \"params\": {...}}");
    std::vector<std::string> out{args[0]};
    for (const auto& c : j["command"]) out.push_back(c.get<std::string>());
    if (j.contains("params"))
        for (const auto& [k, v] : j["params"].items()) {
            if (v.is_boolean()) {
                if (v.get<bool>()) out.push_back("--" + k);
                continue;
            }
            out.push_back("--" + k);
            out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        }
    if (j.contains("seed")) {
        out.push_back("--seed");
        out.push_back(j["seed"].dump());
    }
    for (std::size_t i = 1; i < args.size(); ++i)
        if (i != at && i != at + 1) out.push_back(args[i]);
    return out;
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical experiments with twisted GL(3) x GL(2) sums", "oscsum"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", OSCSUM_VERSION);

    std::string output, format, cache_dir;
    unsigned threads = default_threads();
    u64 seed = 1;
    bool timing = false;
    std::string config_unused;
    app.add_option("-o,--output", output, "result file; stdout when omitted");
    app.add_option("--format", format, "csv or json; taken from the output extension by default")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--cache-dir", cache_dir, "coefficient cache directory (OSCSUM_CACHE overrides)");
    app.add_option("--threads", threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for synthetic coefficients")->capture_default_str();
    app.add_flag("--timing", timing, "record wall time in the provenance block");
    app.add_option("--config", config_unused, "replay a JSON config or an earlier JSON result");

    std::vector<std::unique_ptr<Command>> cmds;
    cmds.push_back(std::make_unique<CoeffsCmd>(app));
    cmds.push_back(std::make_unique<CharsumCmd>(app));
    cmds.push_back(std::make_unique<OscCmd>(app));
    cmds.push_back(std::make_unique<VoronoiCmd>(app));
    cmds.push_back(std::make_unique<DeltaCmd>(app));
    cmds.push_back(std::make_unique<SumCmd>(app));
    cmds.push_back(std::make_unique<FiCmd>(app));
    cmds.push_back(std::make_unique<CorrCmd>(app));
    auto cache = std::make_unique<CacheCmd>(app);
    CacheCmd* cache_ptr = cache.get();
    cmds.push_back(std::move(cache));

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << OSCSUM_VERSION << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "oscsum: " << e.what() << '\n';
        return kInvalid;
    }

    Command* cmd = nullptr;
    for (auto& c : cmds)
        if (c->app->parsed()) cmd = c.get();
    json command = json::array({cmd->app->get_name()});
    if (cmd == cache_ptr) command.push_back(cache_ptr->build->parsed() ? "build" : "verify");

    if (const char* env = std::getenv("OSCSUM_CACHE"); env && *env) cache_dir = env;
    if (format.empty()) format = fs::path(output).extension() == ".json" ? "json" : "csv";

    Coefficients coeffs(cache_dir, err);
    Context ctx{coeffs, threads, seed};
    const auto t0 = std::chrono::steady_clock::now();
    Report rep = cmd->run(ctx);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json provenance;
    provenance["tool"] = "oscsum";
    provenance["version"] = OSCSUM_VERSION;
    provenance["config"] = json{{"command", command}, {"params", cmd->echo()}, {"seed", seed}};
    if (!rep.coefficients.empty()) provenance["coefficients"] = rep.coefficients;
    if (timing) provenance["wall_seconds"] = wall;

    const std::string text = format == "json" ? render_json(rep, provenance) : render_csv(rep, provenance);
    if (output.empty()) {
        out << text;
        return kOk;
    }
    // write beside the target and rename, so a failed run leaves nothing behind
    const std::string tmp = output + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << text;
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ValidationError("cannot write '" + output + "'");
        }
    }
    fs::rename(tmp, output);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        for (std::size_t i = 1; i < args.size(); ++i)
            if (args[i] == "--config") return run_parsed(expand_config(args, i), out, err);
        return run_parsed(args, out, err);
    } catch (const ValidationError& e) {
        err << "oscsum: invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const CertificateError& e) {
        err << "oscsum: certificate failure: " << e.what() << '\n';
        return kCertificate;
    } catch (const std::exception& e) {
        err << "oscsum: error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace oscsum::cli
