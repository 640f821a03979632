// primeineq: validate / reduce / predict / count / compare a system of
// simultaneous linear inequalities in primes, plus the supporting
// diagnostics (Gowers decay, circle-method arcs, local factors).
//
// Exit codes: 0 ok, 2 hypothesis validation failed, 3 budget refused,
// 4 config parse error.

#include <primeineq/analytic.hpp>
#include <primeineq/config.hpp>
#include <primeineq/local.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>

using namespace primeineq;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_json, out_csv;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    long long budget = 0;
    long long W = 0;
    double gamma = 0;
    double eta = 0;
    long long pcut = 0;
    bool override_budget_cap = false;
};

void add_common(CLI::App* cmd, CommonFlags& fl)
{
    cmd->add_option("--config", fl.config_path, "problem config (JSON)")->required();
    cmd->add_option("--json", fl.out_json, "write the JSON report here");
    cmd->add_option("--csv", fl.out_csv, "write CSV output here");
    cmd->add_option("--seed", fl.seed, "override the config seed");
    cmd->add_option("--workers", fl.workers, "worker threads (0 = hardware)");
    cmd->add_option("--budget", fl.budget, "override the quadrature/op budget");
    cmd->add_option("--W", fl.W, "override the W parameter");
    cmd->add_option("--gamma", fl.gamma, "override gamma");
    cmd->add_option("--eta", fl.eta, "override eta");
    cmd->add_option("--pcut", fl.pcut, "override P_cut");
    cmd->add_flag("--force", fl.override_budget_cap,
                  "run even if the op estimate exceeds the budget cap");
}

ProblemConfig load_or_die(const CommonFlags& fl)
{
    ProblemConfig cfg = ProblemConfig::load(fl.config_path); // throws -> caught in main
    if (fl.seed) cfg.seed = fl.seed;
    if (fl.workers) cfg.workers = fl.workers;
    if (fl.budget) cfg.budget = fl.budget;
    if (fl.W) cfg.W = fl.W;
    if (fl.gamma > 0) cfg.gamma = fl.gamma;
    if (fl.eta > 0) cfg.eta = fl.eta;
    if (fl.pcut) cfg.P_cut = fl.pcut;
    if (!fl.out_json.empty()) cfg.out_json = fl.out_json;
    if (!fl.out_csv.empty()) cfg.out_csv = fl.out_csv;
    return cfg;
}

unsigned effective_workers(const ProblemConfig& cfg)
{
    if (cfg.workers) return cfg.workers;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

void emit_report(const ProblemConfig& cfg, json deterministic, json volatile_block)
{
    json full;
    full["schema_version"] = kReportSchemaVersion;
    full["version"] = kVersion;
    full["config"] = cfg.to_json();
    full["report"] = std::move(deterministic);
    full["volatile"] = std::move(volatile_block);
    std::string text = full.dump(2);
    if (!cfg.out_json.empty()) {
        std::ofstream out(cfg.out_json);
        out << text << "\n";
    } else {
        std::cout << text << "\n";
    }
}

json validate_fragment(const ProblemConfig& cfg, const LinearSystem& ls, bool* pass)
{
    json frag;
    frag["rank"] = ls.m; // construction succeeded, so rank = m
    frag["d"] = ls.d;
    frag["prediction_ready"] = ls.prediction_ready;
    bool ok = true;
    if (ls.d >= ls.m + 2) {
        auto dg = is_dual_degenerate(ls);
        frag["dual_degenerate"] = dg.degenerate;
        if (dg.degenerate) {
            ok = false;
            json w = json::array();
            for (const auto& e : dg.witness) w.push_back(e.to_double());
            frag["witness"] = w;
            frag["witness_support"] = {dg.i, dg.j};
        }
        if (ls.d == ls.m + 2)
            frag["minor_criterion"] = minor_criterion(ls);
    } else {
        frag["dual_degenerate"] = nullptr;
        frag["note"] = "d < m+2: degeneracy test and prediction unavailable";
        ok = false;
    }
    auto rd = rational_dimension(ls);
    frag["rational_dimension"] = rd.u;
    frag["purely_irrational"] = rd.u == 0;
    json theta = json::array();
    for (std::size_t i = 0; i < rd.u; i++) {
        json row = json::array();
        for (std::size_t j = 0; j < ls.m; j++)
            row.push_back(rd.Theta(i, j).get_str());
        theta.push_back(row);
    }
    frag["Theta"] = theta;
    (void)cfg;
    if (pass) *pass = ok;
    return frag;
}

json reduction_fragment(const RationalReduction& red)
{
    json frag;
    frag["u"] = red.u;
    auto mat = [](const IntMatrix& M) {
        json rows = json::array();
        for (std::size_t i = 0; i < M.rows; i++) {
            json r = json::array();
            for (std::size_t j = 0; j < M.cols; j++) r.push_back(M(i, j).get_str());
            rows.push_back(r);
        }
        return rows;
    };
    frag["Xi"] = mat(red.Xi);
    frag["x_basis"] = mat(red.x_basis);
    frag["ThetaL"] = mat(red.ThetaL);
    json shifts = json::array();
    for (const auto& s : red.shifts) {
        json sh;
        json r = json::array();
        for (const auto& c : s.r) r.push_back(c.get_str());
        sh["r"] = r;
        sh["min_norm"] = s.min_norm.get_str();
        shifts.push_back(sh);
    }
    frag["R_tilde"] = shifts;
    frag["R_collapsed_to_one"] = red.collapsed;
    frag["minimiser_index"] = red.minimiser;
    frag["minimiser_tie"] = red.minimiser_tie;
    json lp = json::array();
    for (std::size_t i = 0; i < red.L_prime.rows; i++) {
        json row = json::array();
        for (std::size_t j = 0; j < red.L_prime.cols; j++) {
            json cell;
            cell["coords"] = json::array();
            for (const auto& c : red.L_prime(i, j).coords())
                cell["coords"].push_back(c.get_str());
            cell["approx"] = red.L_prime(i, j).to_double();
            row.push_back(cell);
        }
        lp.push_back(row);
    }
    frag["L_prime"] = lp;
    frag["v_prime"] = red.v_prime;
    return frag;
}

json prediction_fragment(const Prediction& pred)
{
    json frag;
    frag["main_term_T_normalised"] = pred.value;
    frag["interval"] = {pred.err_lo, pred.err_hi};
    frag["predicted_weighted_count"] = pred.predicted_weighted_count;
    frag["predicted_count"] = pred.predicted_count;
    frag["P_cut"] = pred.P_cut;
    json terms = json::array();
    for (const auto& t : pred.terms) {
        json tj;
        tj["r"] = t.r;
        tj["S"] = t.S_value;
        tj["S_interval"] = {t.S_lo, t.S_hi};
        tj["S_exact"] = t.S_exact;
        tj["J"] = t.J.value;
        tj["J_std_error"] = t.J.std_error;
        tj["J_samples"] = t.J.samples;
        tj["J_seed"] = t.J.seed;
        tj["J_method"] = t.J.method;
        terms.push_back(tj);
    }
    frag["terms"] = terms;
    return frag;
}

int cmd_validate(const CommonFlags& fl)
{
    ProblemConfig cfg = load_or_die(fl);
    json det, vol;
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    try {
        LinearSystem ls = cfg.system();
        det["validate"] = validate_fragment(cfg, ls, &pass);
    } catch (const std::invalid_argument& e) {
        det["validate"] = {{"error", e.what()}};
        pass = false;
    }
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    std::cerr << (pass ? "validation: all hypotheses hold\n"
                       : "validation: FAILED (see report)\n");
    return pass ? 0 : 2;
}

int cmd_predict(const CommonFlags& fl)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    LinearSystem ls = cfg.system();
    bool pass = false;
    json det;
    det["validate"] = validate_fragment(cfg, ls, &pass);
    if (!pass) {
        emit_report(cfg, det, json::object());
        return 2;
    }
    auto red = rational_reduction(ls, cfg.eta, ls.epsilon);
    det["reduction"] = reduction_fragment(red);
    auto pred = predicted_main_term(ls, red, cfg.P_cut, cfg.budget, cfg.seed);
    det["prediction"] = prediction_fragment(pred);
    auto iv = unweighted_from_weighted(pred.predicted_weighted_count, ls.N, ls.d,
                                       cfg.delta);
    det["unweighted_interval"] = {iv.lo, iv.hi};
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    std::cerr << "predicted count ~ " << pred.predicted_count << "\n";
    return 0;
}

int cmd_count(const CommonFlags& fl)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    LinearSystem ls = cfg.system();
    PrimeTable table(ls.N);
    CounterOptions opts;
    opts.workers = effective_workers(cfg);
    if (fl.override_budget_cap) opts.budget_cap = 1e18;
    if (!cfg.out_csv.empty()) opts.collect_solutions = 10000; // inspection cap
    CountResult res;
    try {
        res = count_prime_solutions(ls, table, opts);
    } catch (const std::runtime_error& e) {
        std::cerr << "budget refusal: " << e.what() << "\n";
        return 3;
    }
    json det;
    det["count"] = (long long)res.count;
    det["strategy"] = res.strategy;
    det["outer_iterations"] = res.outer_iterations;
    det["boundary_escalations"] = res.boundary_escalations;
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        for (std::size_t j = 0; j < ls.d; j++) out << (j ? ",p" : "p") << j + 1;
        out << "\n";
        for (const auto& sol : res.solutions) {
            for (std::size_t j = 0; j < sol.size(); j++)
                out << (j ? "," : "") << sol[j];
            out << "\n";
        }
        det["solutions_streamed"] = res.solutions.size();
    }
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    vol["count_wall_seconds"] = res.wall_seconds;
    emit_report(cfg, det, vol);
    std::cerr << "exact count = " << (long long)res.count << "\n";
    return 0;
}

int cmd_compare(const CommonFlags& fl)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    {
        LinearSystem probe = cfg.system();
        bool pass = false;
        json frag = validate_fragment(cfg, probe, &pass);
        if (!pass) {
            emit_report(cfg, json{{"validate", frag}}, json::object());
            return 2;
        }
    }
    json rows = json::array();
    std::string csv = "N,predicted_count,exact_count,ratio,S_terms,J_total\n";
    for (long long N : cfg.N_list) {
        LinearSystem ls = cfg.system(N);
        auto red = rational_reduction(ls, cfg.eta, ls.epsilon);
        auto pred = predicted_main_term(ls, red, cfg.P_cut, cfg.budget, cfg.seed);
        PrimeTable table(N);
        CounterOptions opts;
        opts.workers = effective_workers(cfg);
        if (fl.override_budget_cap) opts.budget_cap = 1e18;
        CountResult cres;
        try {
            cres = count_prime_solutions(ls, table, opts);
        } catch (const std::runtime_error& e) {
            std::cerr << "budget refusal at N = " << N << ": " << e.what() << "\n";
            return 3;
        }
        double ratio = pred.predicted_count > 0 ? cres.count / pred.predicted_count
                                                : 0.0;
        json row;
        row["N"] = N;
        row["predicted_count"] = pred.predicted_count;
        row["exact_count"] = (long long)cres.count;
        row["ratio"] = ratio;
        row["prediction"] = prediction_fragment(pred);
        rows.push_back(row);
        csv += std::to_string(N) + "," + std::to_string(pred.predicted_count) + "," +
               std::to_string((long long)cres.count) + "," + std::to_string(ratio) +
               "," + std::to_string(pred.terms.size()) + "," +
               std::to_string(pred.value) + "\n";
        std::cerr << "N = " << N << ": predicted " << pred.predicted_count
                  << ", exact " << (long long)cres.count << ", ratio " << ratio
                  << "\n";
    }
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        out << csv;
    }
    json det;
    det["compare"] = rows;
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    return 0;
}

int cmd_gowers(const CommonFlags& fl, unsigned k, std::vector<long long> Ns)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    if (Ns.empty()) Ns = {1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16, 1 << 17};
    long long maxN = *std::max_element(Ns.begin(), Ns.end());
    PrimeTable table(maxN);
    auto dt = gowers_decay_experiment(table, cfg.W, k, Ns);
    json det;
    json rows = json::array();
    std::string csv = "N,value\n";
    for (auto& r : dt.rows) {
        rows.push_back({{"N", r.N}, {"value", r.value}});
        csv += std::to_string(r.N) + "," + std::to_string(r.value) + "\n";
        std::cerr << "N = " << r.N << ": " << r.value << "\n";
    }
    det["gowers"] = {{"W", cfg.W},
                     {"k", k},
                     {"rows", rows},
                     {"strictly_decreasing", dt.strictly_decreasing},
                     {"final_over_initial", dt.final_over_initial}};
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        out << csv;
    }
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    return 0;
}

int cmd_circle(const CommonFlags& fl, double B, double T_arc, std::size_t grid)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    LinearSystem ls = cfg.system();
    PrimeTable table(ls.N);
    auto rep = major_arc_compare(table, ls.N, B, grid ? grid : 64);
    Matrix<double> Ln = ls.L_num();
    std::vector<double> row0(ls.d);
    for (std::size_t j = 0; j < ls.d; j++) row0[j] = Ln(0, j);
    double msup = minor_arc_sup(row0, table, ls.N, B, T_arc, 2048);
    json det;
    det["major_arc"] = {{"B", B},
                        {"sup_rel_dev", rep.sup_rel_dev},
                        {"mean_rel_dev", rep.mean_rel_dev}};
    det["minor_arc_sup_lower_bound"] = msup;
    std::string csv = "theta,rel_dev\n";
    for (auto& [th, dev] : rep.samples)
        csv += std::to_string(th) + "," + std::to_string(dev) + "\n";
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        out << csv;
    }
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    std::cerr << "major-arc sup dev " << rep.sup_rel_dev << ", minor-arc sup (lb) "
              << msup << "\n";
    return 0;
}

int cmd_localfactors(const CommonFlags& fl)
{
    ProblemConfig cfg = load_or_die(fl);
    auto t0 = std::chrono::steady_clock::now();
    LinearSystem ls = cfg.system();
    auto red = rational_reduction(ls, cfg.eta, ls.epsilon);
    json det;
    det["reduction"] = reduction_fragment(red);
    json series = json::array();
    std::string csv = "shift_index,p,beta_p\n";
    for (std::size_t si = 0; si < red.shifts.size(); si++) {
        if (red.u == 0) {
            series.push_back({{"r_index", si}, {"S", 1.0}, {"exact_one", true}});
            continue;
        }
        LocalSeries S = singular_series(red.Xi, red.shifts[si].r, cfg.P_cut);
        json sj;
        sj["r_index"] = si;
        sj["truncated_product"] = S.truncated_product;
        sj["interval"] = {S.lo(), S.hi()};
        sj["K_estimate"] = S.K_estimate;
        sj["exactly_zero"] = S.exactly_zero;
        json factors = json::array();
        std::size_t cap = 100; // verbosity cap
        for (std::size_t i = 0; i < S.factors.size() && i < cap; i++) {
            factors.push_back({{"p", S.factors[i].first},
                               {"beta", S.factors[i].second.get_str()}});
            csv += std::to_string(si) + "," + std::to_string(S.factors[i].first) +
                   "," + S.factors[i].second.get_str() + "\n";
        }
        sj["factors"] = factors;
        series.push_back(sj);
    }
    det["singular_series"] = series;
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        out << csv;
    }
    json vol;
    vol["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit_report(cfg, det, vol);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"linear inequalities in primes: predictions vs exact counts"};
    app.require_subcommand(1);

    CommonFlags fl;
    unsigned gowers_k = 2;
    std::vector<long long> gowers_N;
    double circle_B = 1.0, circle_T = 0.5;
    std::size_t circle_grid = 64;

    auto* v = app.add_subcommand("validate", "check rank, degeneracy and irrationality hypotheses");
    add_common(v, fl);
    auto* p = app.add_subcommand("predict", "singular series x integral prediction");
    add_common(p, fl);
    auto* c = app.add_subcommand("count", "exact prime-solution count");
    add_common(c, fl);
    auto* cp = app.add_subcommand("compare", "prediction vs exact count over N_list");
    add_common(cp, fl);
    auto* g = app.add_subcommand("gowers", "Gowers-norm decay experiment");
    add_common(g, fl);
    g->add_option("--k", gowers_k, "norm order (2 or 3)");
    g->add_option("--Nlist", gowers_N, "N values (default 2^12..2^17)");
    auto* ci = app.add_subcommand("circle", "major/minor arc diagnostics");
    add_common(ci, fl);
    ci->add_option("--B", circle_B, "major arc log-power");
    ci->add_option("--T", circle_T, "trivial arc threshold");
    ci->add_option("--grid", circle_grid, "sample grid size");
    auto* lf = app.add_subcommand("localfactors", "per-prime singular series table");
    add_common(lf, fl);

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed()) return cmd_validate(fl);
        if (p->parsed()) return cmd_predict(fl);
        if (c->parsed()) return cmd_count(fl);
        if (cp->parsed()) return cmd_compare(fl);
        if (g->parsed()) return cmd_gowers(fl, gowers_k, gowers_N);
        if (ci->parsed()) return cmd_circle(fl, circle_B, circle_T, circle_grid);
        if (lf->parsed()) return cmd_localfactors(fl);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
