#include "hallkit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hallkit/model_io.hpp"
#include "hallkit/parallel.hpp"
#include "hallkit/propagator.hpp"
#include "hallkit/response.hpp"
#include "hallkit/topology.hpp"

namespace hallkit::cli {

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_cell(const Cell& c)
{
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double x) const { return format_double(x); }
        std::string operator()(long long n) const { return std::to_string(n); }
        std::string operator()(const std::string& s) const
        {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return q + "\"";
        }
    };
    return std::visit(V{}, c);
}

nlohmann::json json_cell(const Cell& c)
{
    struct V {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(double x) const
        {
            // JSON has no nan or inf
            if (!std::isfinite(x)) return format_double(x);
            return x;
        }
        nlohmann::json operator()(long long n) const { return n; }
        nlohmann::json operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

}  // namespace

nlohmann::json policy_to_json(const NumericPolicy& p)
{
    return {
        {"geometry_tol", p.geometry_tol},
        {"hermitian_tol", p.hermitian_tol},
        {"gap_threshold", p.gap_threshold},
        {"fermi_level_tol", p.fermi_level_tol},
        {"critical_band", p.critical_band},
        {"drop_tol", p.drop_tol},
        {"degeneracy_tol", p.degeneracy_tol},
        {"eigen_residual_tol", p.eigen_residual_tol},
        {"solver_tol", p.solver_tol},
        {"fit_residual_tol", p.fit_residual_tol},
        {"max_modes", p.max_modes},
        {"full_dim_max", p.full_dim_max},
        {"ground_dim_max", p.ground_dim_max},
        {"gibbs_dim_max", p.gibbs_dim_max},
        {"wick_monomials_max", p.wick_monomials_max},
        {"wick_bilinears_max", p.wick_bilinears_max},
    };
}

NumericPolicy policy_from_json(const nlohmann::json& doc, NumericPolicy p)
{
    if (!doc.is_object()) throw ValidationError("policy must be a JSON object");
    std::map<std::string, double*> reals = {
        {"geometry_tol", &p.geometry_tol},         {"hermitian_tol", &p.hermitian_tol},
        {"gap_threshold", &p.gap_threshold},       {"fermi_level_tol", &p.fermi_level_tol},
        {"critical_band", &p.critical_band},       {"drop_tol", &p.drop_tol},
        {"degeneracy_tol", &p.degeneracy_tol},     {"eigen_residual_tol", &p.eigen_residual_tol},
        {"solver_tol", &p.solver_tol},             {"fit_residual_tol", &p.fit_residual_tol},
    };
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!it.value().is_number()) throw ValidationError("policy field " + it.key() + " must be a number");
        const double x = it.value().get<double>();
        if (!(x > 0.0)) throw ValidationError("policy field " + it.key() + " must be positive");
        if (auto r = reals.find(it.key()); r != reals.end()) {
            *r->second = x;
            continue;
        }
        if (x != std::floor(x)) throw ValidationError("policy field " + it.key() + " must be an integer");
        const auto n = static_cast<long>(x);
        if (it.key() == "max_modes") p.max_modes = static_cast<int>(n);
        else if (it.key() == "full_dim_max") p.full_dim_max = n;
        else if (it.key() == "ground_dim_max") p.ground_dim_max = n;
        else if (it.key() == "gibbs_dim_max") p.gibbs_dim_max = n;
        else if (it.key() == "wick_monomials_max") p.wick_monomials_max = static_cast<int>(n);
        else if (it.key() == "wick_bilinears_max") p.wick_bilinears_max = static_cast<int>(n);
        else throw ValidationError("unknown policy field " + it.key());
    }
    return p;
}

std::string to_csv(const Table& t, const NumericPolicy& policy)
{
    std::ostringstream os;
    os << "# hallkit " << t.command << "\n";
    for (const auto& [k, v] : t.params) os << "# param." << k << " = " << v << "\n";
    const nlohmann::json pj = policy_to_json(policy);
    for (auto it = pj.begin(); it != pj.end(); ++it) {
        os << "# policy." << it.key() << " = ";
        if (it.value().is_number_float()) os << format_double(it.value().get<double>());
        else os << it.value().dump();
        os << "\n";
    }
    for (size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
        os << "\n";
    }
    return os.str();
}

nlohmann::json to_json(const Table& t, const NumericPolicy& policy)
{
    nlohmann::json doc;
    doc["command"] = t.command;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : t.params) params[k] = v;
    doc["params"] = params;
    doc["policy"] = policy_to_json(policy);
    doc["columns"] = t.columns;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json r = nlohmann::json::object();
        for (size_t c = 0; c < row.size(); ++c) r[t.columns[c]] = json_cell(row[c]);
        rows.push_back(r);
    }
    doc["rows"] = rows;
    return doc;
}

namespace {

struct Common {
    int threads = 0;
    bool oracle = false;
    long long seed = 0;
    std::string out;
    std::string format = "csv";
    std::string policy_file;
};

struct ModelArgs {
    std::string path;
    std::optional<double> U;
    std::optional<double> mu;
    bool hartree = false;
};

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double x = 0.0;
        const char* b = item.data();
        const char* e = b + item.size();
        while (b < e && *b == ' ') ++b;
        const auto r = std::from_chars(b, e, x);
        if (r.ec != std::errc() || r.ptr != e) throw ValidationError("bad number in list: '" + item + "'");
        out.push_back(x);
    }
    if (out.empty()) throw ValidationError("empty list");
    return out;
}

HoppingModel load(const ModelArgs& a)
{
    HoppingModel m = load_model(a.path);
    if (a.U) m.U = *a.U;
    if (a.mu) m.mu = *a.mu;
    if (a.hartree) m.mu += hartree_chemical_potential(m, m.U);
    return m;
}

void add_model_options(CLI::App* sub, ModelArgs& a, bool interacting)
{
    sub->add_option("--model", a.path, "model JSON file")->required();
    sub->add_option("--mu", a.mu, "override the chemical potential");
    if (interacting) {
        sub->add_option("--U", a.U, "override the coupling");
        sub->add_flag("--hartree", a.hartree, "add U sum_b v_ab to mu");
    }
}

std::string str(double x) { return format_double(x); }

// Commands fill the table and summary lines; nothing is written before the command returns.
struct Result {
    Table table;
    std::vector<std::string> summary;
    bool table_to_stdout = false;
};

}  // namespace

int run(const std::vector<std::string>& argv_in, std::ostream& out, std::ostream& err)
{
    CLI::App app{"hallkit: Hall response of lattice fermions on small tori"};
    app.require_subcommand(1);
    Common common;
    ModelArgs margs;
    std::function<Result(const NumericPolicy&)> command;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--threads", common.threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);
        sub->add_flag("--oracle", common.oracle, "use the discretized time-integral oracle for correlators");
        sub->add_option("--seed", common.seed, "reserved; no stochastic algorithm uses it");
        sub->add_option("--out", common.out, "output file (table)");
        sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--policy", common.policy_file, "JSON object overriding numeric policy fields");
    };

    // bands
    int grid = 24;
    {
        auto* sub = app.add_subcommand("bands", "Bloch bands on an N x N grid of the Brillouin zone");
        add_common(sub);
        add_model_options(sub, margs, false);
        sub->add_option("--grid", grid, "grid size")->check(CLI::PositiveNumber);
        sub->callback([&] {
            command = [&](const NumericPolicy&) {
                const HoppingModel m = load(margs);
                const auto [G1, G2] = reciprocal_basis(m.spec);
                Result r;
                r.table_to_stdout = true;
                r.table.command = "bands";
                r.table.params = {{"model", margs.path}, {"grid", std::to_string(grid)}};
                r.table.columns = {"k1", "k2", "kx", "ky"};
                for (int c = 0; c < m.spec.num_colors(); ++c) r.table.columns.push_back("band_" + std::to_string(c));
                for (int a = 0; a < grid; ++a)
                    for (int b = 0; b < grid; ++b) {
                        const Vec2 k = (double(a) / grid) * G1 + (double(b) / grid) * G2;
                        const RVector e = bands(m, k);
                        std::vector<Cell> row = {double(a) / grid, double(b) / grid, k.x(), k.y()};
                        for (long c = 0; c < e.size(); ++c) row.push_back(e(c));
                        r.table.rows.push_back(row);
                    }
                return r;
            };
        });
    }

    // gap
    int gap_grid = 64;
    {
        auto* sub = app.add_subcommand("gap", "distance from mu to the Bloch spectrum");
        add_common(sub);
        add_model_options(sub, margs, false);
        sub->add_option("--grid", gap_grid, "grid size")->check(CLI::PositiveNumber);
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                const GapInfo g = spectral_gap(m, gap_grid, m.mu, policy);
                Result r;
                r.table.command = "gap";
                r.table.params = {{"model", margs.path}, {"grid", std::to_string(gap_grid)}};
                r.table.columns = {"mu", "gap", "kx", "ky", "gapless"};
                r.table.rows.push_back({m.mu, g.delta, g.k.x(), g.k.y(), (long long)g.gapless});
                r.summary.push_back("gap = " + str(g.delta));
                return r;
            };
        });
    }

    // chern
    int chern_grid = 24;
    std::string gauge = "bravais";
    {
        auto* sub = app.add_subcommand("chern", "Chern number of the bands below mu");
        add_common(sub);
        add_model_options(sub, margs, false);
        sub->add_option("--grid", chern_grid, "grid size")->check(CLI::Range(2, 4096));
        sub->add_option("--gauge", gauge, "bravais or displaced")->check(CLI::IsMember({"bravais", "displaced"}));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                const ChernResult c = chern_number(m, m.mu, chern_grid, policy,
                                                   gauge == "bravais" ? ChernGauge::bravais : ChernGauge::displaced);
                Result r;
                r.table.command = "chern";
                r.table.params = {{"model", margs.path}, {"grid", std::to_string(chern_grid)}, {"gauge", gauge}};
                r.table.columns = {"grid", "chern", "phase_sum", "gap"};
                r.table.rows.push_back({(long long)chern_grid, (long long)c.chern, c.phase_sum, c.gap_at_grid});
                r.summary.push_back("chern = " + std::to_string(c.chern));
                return r;
            };
        });
    }

    // phase-diagram
    double t1 = 1.0, t2 = 0.1;
    int phi_steps = 41, w_steps = 41, k_grid = 24;
    std::optional<double> w_max;
    {
        auto* sub = app.add_subcommand("phase-diagram", "Haldane (phi, W) phase diagram");
        add_common(sub);
        sub->add_option("--t1", t1, "nearest-neighbour hopping");
        sub->add_option("--t2", t2, "next-nearest-neighbour hopping");
        sub->add_option("--phi-steps", phi_steps, "points in phi over [-pi, pi]")->check(CLI::Range(2, 100000));
        sub->add_option("--w-steps", w_steps, "points in W over [-w-max, w-max]")->check(CLI::Range(2, 100000));
        sub->add_option("--w-max", w_max, "W range, default 1.5 * 3 sqrt(3) t2")->check(CLI::PositiveNumber);
        sub->add_option("--k-grid", k_grid, "Chern grid")->check(CLI::Range(2, 4096));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const double wm = w_max ? *w_max : 1.5 * 3.0 * std::sqrt(3.0) * std::abs(t2);
                if (!(wm > 0.0)) throw ValidationError("W range is empty; give --w-max or a nonzero --t2");
                const auto rows = haldane_phase_diagram(t1, t2, linspace(-kPi, kPi, phi_steps),
                                                        linspace(-wm, wm, w_steps), {k_grid}, policy);
                Result r;
                r.table_to_stdout = true;
                r.table.command = "phase-diagram";
                r.table.params = {{"t1", str(t1)},
                                  {"t2", str(t2)},
                                  {"phi_steps", std::to_string(phi_steps)},
                                  {"w_steps", std::to_string(w_steps)},
                                  {"w_max", str(wm)},
                                  {"k_grid", std::to_string(k_grid)}};
                r.table.columns = {"phi", "W", "m_plus", "m_minus", "chern_analytic", "chern_numeric", "gap"};
                for (const auto& p : rows)
                    r.table.rows.push_back({p.phi, p.W, p.m_plus, p.m_minus, p.chern_analytic,
                                            p.numeric_available ? Cell((long long)p.chern_numeric) : Cell(),
                                            p.gap});
                return r;
            };
        });
    }

    // free-sigma
    int sigma_grid = 200;
    {
        auto* sub = app.add_subcommand("free-sigma", "non-interacting conductivity matrix from Fermi projectors");
        add_common(sub);
        add_model_options(sub, margs, false);
        sub->add_option("--grid", sigma_grid, "grid size")->check(CLI::Range(4, 4096));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                const Eigen::Matrix2d s = noninteracting_sigma(m, m.mu, sigma_grid, policy);
                const int c = chern_number(m, m.mu, std::min(sigma_grid, 64), policy).chern;
                Result r;
                r.table.command = "free-sigma";
                r.table.params = {{"model", margs.path}, {"grid", std::to_string(sigma_grid)}};
                r.table.columns = {"i", "j", "sigma"};
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) r.table.rows.push_back({(long long)i + 1, (long long)j + 1, s(i, j)});
                r.summary.push_back("sigma12 = " + str(s(0, 1)));
                r.summary.push_back("chern/(2pi) = " + str(c / (2.0 * kPi)));
                return r;
            };
        });
    }

    // ed-sigma
    int L = 2;
    double beta = 0.0;
    int n_omega = 4;
    std::string zmode = "auto";
    {
        auto* sub = app.add_subcommand("ed-sigma", "sigma-bar from exact diagonalization on the L x L torus");
        add_common(sub);
        add_model_options(sub, margs, true);
        sub->add_option("--L", L, "torus size")->check(CLI::Range(1, 16));
        sub->add_option("--beta", beta, "inverse temperature, 0 = ground state")->check(CLI::NonNegativeNumber);
        sub->add_option("--n-omega", n_omega, "Matsubara points in the fit")->check(CLI::Range(3, 64));
        sub->add_option("--mode", zmode, "ground-state path: auto, full, resolvent")
            ->check(CLI::IsMember({"auto", "full", "resolvent"}));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                Result r;
                r.table.command = "ed-sigma";
                r.table.params = {{"model", margs.path}, {"L", std::to_string(L)}, {"beta", str(beta)},
                                  {"U", str(m.U)},        {"mu", str(m.mu)},         {"oracle", common.oracle ? "1" : "0"}};
                r.table.columns = {"i", "j", "sigma", "error", "flagged"};
                Eigen::Matrix2d s, e = Eigen::Matrix2d::Zero();
                bool flagged = false;
                if (beta > 0.0) {
                    r.table.params.emplace_back("n_omega", std::to_string(n_omega));
                    const FiniteTemperatureResponse resp(m, L, beta, policy);
                    const SigmaMatrix sm = sigma_imaginary(resp, n_omega, common.oracle);
                    s = sm.value;
                    e = sm.error;
                    flagged = sm.flagged;
                } else {
                    const ZeroTMode mode = zmode == "full"        ? ZeroTMode::full
                                           : zmode == "resolvent" ? ZeroTMode::resolvent
                                                                  : ZeroTMode::automatic;
                    const ZeroTemperatureResponse resp(m, L, mode, policy);
                    // the oracle side of the ground-state path is the real-time integral
                    s = common.oracle ? resp.sigma_real() : resp.sigma_imaginary();
                    r.table.params.emplace_back("mode", resp.mode() == ZeroTMode::full ? "full" : "resolvent");
                    r.summary.push_back("ground N = " + std::to_string(resp.ground().N) +
                                        ", gap = " + str(std::min(resp.excitation_gap(), resp.ground().degeneracy_gap)));
                }
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        r.table.rows.push_back({(long long)i + 1, (long long)j + 1, s(i, j), e(i, j), (long long)flagged});
                r.summary.push_back("sigma12 = " + str(s(0, 1)));
                return r;
            };
        });
    }

    // ward-check
    int n_freq = 5;
    {
        auto* sub = app.add_subcommand("ward-check", "Ward identity residuals over all grid momenta");
        add_common(sub);
        add_model_options(sub, margs, true);
        sub->add_option("--L", L, "torus size")->check(CLI::Range(1, 16));
        sub->add_option("--beta", beta, "inverse temperature")->required()->check(CLI::PositiveNumber);
        sub->add_option("--n-freq", n_freq, "frequencies 2 pi n / beta, n = 0..n-freq-1")->check(CLI::Range(1, 64));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                const FiniteTemperatureResponse resp(m, L, beta, policy);
                const WardReport w = ward_check(resp, n_freq, common.oracle);
                Result r;
                r.table.command = "ward-check";
                r.table.params = {{"model", margs.path}, {"L", std::to_string(L)}, {"beta", str(beta)},
                                  {"U", str(m.U)},        {"mu", str(m.mu)},         {"n_freq", std::to_string(n_freq)},
                                  {"oracle", common.oracle ? "1" : "0"}};
                r.table.columns = {"max_residual", "worst_p1", "worst_p2", "worst_alpha", "worst_omega", "evaluations"};
                r.table.rows.push_back({w.max_residual, (long long)w.worst_p.x(), (long long)w.worst_p.y(),
                                        (long long)w.worst_alpha, w.worst_omega, (long long)w.evaluations});
                r.summary.push_back("max residual = " + str(w.max_residual));
                return r;
            };
        });
    }

    // wick-rotation
    std::string omegas_arg = "0.1,0.5,1.0";
    {
        auto* sub = app.add_subcommand("wick-rotation", "imaginary-frequency vs real-time response in the ground state");
        add_common(sub);
        add_model_options(sub, margs, true);
        sub->add_option("--L", L, "torus size")->check(CLI::Range(1, 16));
        sub->add_option("--omegas", omegas_arg, "comma-separated frequencies");
        sub->add_option("--mode", zmode, "auto, full, resolvent")->check(CLI::IsMember({"auto", "full", "resolvent"}));
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                const std::vector<double> omegas = parse_list(omegas_arg);
                const ZeroTMode mode = zmode == "full"        ? ZeroTMode::full
                                       : zmode == "resolvent" ? ZeroTMode::resolvent
                                                              : ZeroTMode::automatic;
                const ZeroTemperatureResponse resp(m, L, mode, policy);
                const double L2 = double(L) * L;
                Result r;
                r.table.command = "wick-rotation";
                r.table.params = {{"model", margs.path}, {"L", std::to_string(L)}, {"U", str(m.U)}, {"mu", str(m.mu)}};
                r.table.columns = {"omega", "i", "j", "matsubara_re", "matsubara_im", "real_time_re", "real_time_im",
                                   "deviation"};
                double worst = 0.0;
                for (double w : omegas)
                    for (int i = 1; i <= 2; ++i)
                        for (int j = 1; j <= 2; ++j) {
                            const Complex k = resp.correlator(i, j, w);
                            const Complex rt = -kI * resp.real_time_integral(i, j, w) / L2;
                            const double d = std::abs(k - rt);
                            worst = std::max(worst, d);
                            r.table.rows.push_back({w, (long long)i, (long long)j, k.real(), k.imag(), rt.real(),
                                                    rt.imag(), d});
                        }
                r.summary.push_back("max deviation = " + str(worst));
                return r;
            };
        });
    }

    // sum-rule
    {
        auto* sub = app.add_subcommand("sum-rule", "K(0,0) + <D>/L^2");
        add_common(sub);
        add_model_options(sub, margs, true);
        sub->add_option("--L", L, "torus size")->check(CLI::Range(1, 16));
        sub->add_option("--beta", beta, "inverse temperature, 0 = ground state")->check(CLI::NonNegativeNumber);
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                double dev = 0.0;
                if (beta > 0.0) {
                    const FiniteTemperatureResponse resp(m, L, beta, policy);
                    dev = sum_rule_deviation(resp);
                } else {
                    const ZeroTemperatureResponse resp(m, L, ZeroTMode::automatic, policy);
                    dev = resp.sum_rule_deviation();
                }
                Result r;
                r.table.command = "sum-rule";
                r.table.params = {{"model", margs.path}, {"L", std::to_string(L)}, {"beta", str(beta)},
                                  {"U", str(m.U)},        {"mu", str(m.mu)}};
                r.table.columns = {"deviation"};
                r.table.rows.push_back({dev});
                r.summary.push_back("deviation = " + str(dev));
                return r;
            };
        });
    }

    // universality
    std::string u_list = "0,0.05,0.1", l_list = "2";
    bool no_hartree = false;
    double u_window = 1.0;
    {
        auto* sub = app.add_subcommand("universality", "sigma-bar_12 against U and L");
        add_common(sub);
        sub->add_option("--model", margs.path, "model JSON file")->required();
        sub->add_option("--mu", margs.mu, "override the chemical potential at U = 0");
        sub->add_option("--U-list", u_list, "comma-separated couplings");
        sub->add_option("--L-list", l_list, "comma-separated torus sizes");
        sub->add_option("--beta", beta, "inverse temperature, 0 = ground state")->check(CLI::NonNegativeNumber);
        sub->add_flag("--no-hartree", no_hartree, "keep mu fixed instead of following the Hartree shift");
        sub->add_option("--u-window", u_window, "flag couplings beyond this magnitude")->check(CLI::PositiveNumber);
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                const HoppingModel m = load(margs);
                std::vector<int> Ls;
                for (double x : parse_list(l_list)) {
                    if (x != std::floor(x) || x < 1) throw ValidationError("torus sizes must be positive integers");
                    Ls.push_back(static_cast<int>(x));
                }
                UniversalityOptions opt;
                opt.hartree_mu = !no_hartree;
                opt.beta = beta;
                opt.u_window = u_window;
                const auto rows = universality_scan(m, parse_list(u_list), Ls, opt, policy);
                Result r;
                r.table_to_stdout = true;
                r.table.command = "universality";
                r.table.params = {{"model", margs.path}, {"U_list", u_list}, {"L_list", l_list},
                                  {"beta", str(beta)},    {"hartree_mu", no_hartree ? "0" : "1"}};
                r.table.columns = {"U", "L", "mode", "sigma12", "delta_sigma12", "gap", "flags"};
                for (const auto& u : rows)
                    r.table.rows.push_back({u.U, (long long)u.L, u.mode, u.sigma12, u.delta_sigma12, u.gap, u.flags});
                return r;
            };
        });
    }

    // sigma1
    FirstOrderOptions fo;
    bool with_fd = false;
    double fd_step = 1e-3;
    {
        auto* sub = app.add_subcommand("sigma1", "first-order coefficient of sigma-bar_12 from connected pairings");
        add_common(sub);
        add_model_options(sub, margs, false);
        sub->add_option("--L", L, "torus size")->check(CLI::Range(1, 16));
        sub->add_option("--beta", beta, "inverse temperature")->required()->check(CLI::PositiveNumber);
        sub->add_option("--n-omega", n_omega, "Matsubara points in the fit")->check(CLI::Range(3, 64));
        sub->add_option("--panel", fo.panel, "quadrature panel length")->check(CLI::PositiveNumber);
        sub->add_option("--nodes", fo.nodes, "Gauss-Legendre nodes per panel")->check(CLI::Range(2, 128));
        sub->add_flag("--fd", with_fd, "also differentiate the exact sigma-bar in U at U = 0");
        sub->add_option("--fd-step", fd_step, "finite-difference step")->check(CLI::PositiveNumber);
        sub->callback([&] {
            command = [&](const NumericPolicy& policy) {
                HoppingModel m = load(margs);
                m.U = 0.0;
                const SigmaEstimate s = perturbative_sigma_first_order(m, beta, L, n_omega, fo, policy);
                Result r;
                r.table.command = "sigma1";
                r.table.params = {{"model", margs.path}, {"L", std::to_string(L)},        {"beta", str(beta)},
                                  {"mu", str(m.mu)},      {"n_omega", std::to_string(n_omega)}, {"panel", str(fo.panel)},
                                  {"nodes", std::to_string(fo.nodes)}};
                r.table.columns = {"source", "value", "error", "flagged"};
                r.table.rows.push_back({std::string("wick"), s.value, s.error, (long long)s.flagged});
                r.summary.push_back("sigma1 = " + str(s.value) + " +- " + str(s.error));
                if (with_fd) {
                    const SigmaEstimate d = sigma_derivative_in_U(m, L, beta, fd_step, n_omega, policy);
                    // sigma-bar = sigma0 - U sigma1 + ...
                    r.table.rows.push_back({std::string("-dsigma/dU"), -d.value, d.error, (long long)d.flagged});
                    r.summary.push_back("-dsigma/dU = " + str(-d.value) + " +- " + str(d.error));
                }
                return r;
            };
        });
    }

    std::vector<std::string> args(argv_in.begin() + (argv_in.empty() ? 0 : 1), argv_in.end());
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return validation_error;
    }

    std::filesystem::path tmp;
    try {
        NumericPolicy policy = default_policy();
        if (!common.policy_file.empty()) {
            std::ifstream in(common.policy_file);
            if (!in) throw ValidationError("cannot open policy file " + common.policy_file);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(std::string("policy file: ") + e.what());
            }
            policy = policy_from_json(doc, policy);
        }
        set_thread_count(common.threads);
        const Result res = command(policy);

        const std::string body = common.format == "json" ? to_json(res.table, policy).dump(2) + "\n"
                                                         : to_csv(res.table, policy);
        if (!common.out.empty()) {
            tmp = common.out + ".partial";
            {
                std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
                if (!f) throw ValidationError("cannot write " + tmp.string());
                f << body;
                if (!f) throw ValidationError("write failed for " + tmp.string());
            }
            std::filesystem::rename(tmp, common.out);
            tmp.clear();
        }
        if (common.out.empty() && common.format == "json") {
            out << body;
            return ok;
        }
        for (const auto& line : res.summary) out << line << "\n";
        if (common.out.empty() && (res.table_to_stdout || res.summary.empty())) out << body;
        return ok;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        if (!tmp.empty()) std::filesystem::remove(tmp);
        return validation_error;
    } catch (const GuardError& e) {
        err << "refused: " << e.what() << "\n";
        if (!tmp.empty()) std::filesystem::remove(tmp);
        return guard_refusal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        if (!tmp.empty()) std::filesystem::remove(tmp);
        return internal_error;
    }
}

int run(int argc, char** argv)
{
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace hallkit::cli
