// Command-line front end: episode simulation, local learning, geometry
// reports, lower-bound scenarios, synthetic optimizer runs, trace aggregation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "menurec/geometry.hpp"
#include "menurec/local_learning.hpp"
#include "menurec/orchestrator.hpp"
#include "menurec/rcfkm.hpp"
#include "menurec/scenarios.hpp"

using nlohmann::json;
using namespace menurec;

namespace {

void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << '\n';
}

int cmd_simulate(const std::string& config_path, std::int64_t seed_override, bool has_seed,
                 const std::string& trace_path, const std::string& report_path,
                 const std::string& csv_path, double mesh_step, bool no_benchmark) {
    ScenarioConfig cfg = load_scenario_config(config_path);
    if (has_seed) cfg.seed = static_cast<std::uint64_t>(seed_override);
    ModelPtr model = cfg.load_model();
    RewardFn rewards = cfg.rewards.to_fn(cfg.n);

    PhaseSchedule schedule = compute_schedule(cfg.n, cfg.k, cfg.T, cfg.family, cfg.degree,
                                              cfg.c, cfg.lambda, cfg.overrides);

    std::optional<SimplexVector> benchmark;
    if (!no_benchmark && cfg.n <= 6) {
        Rng probe_rng(cfg.seed ^ 0x6f7261636c65ull);
        auto probes = default_probe_set(cfg.n, 32, probe_rng);
        OracleResult oracle =
            oracle_best_point(*model, cfg.c, rewards, cfg.T, mesh_step, probes);
        benchmark = oracle.best_point;
    }

    EpisodeResult ep = run_episode(*model, rewards, schedule, cfg.seed, benchmark);

    if (!trace_path.empty()) write_trace_jsonl(trace_path, ep.trace, cfg);
    if (!csv_path.empty()) trace_to_csv(ep.trace, csv_path);
    if (!report_path.empty()) write_report_json(report_path, ep.report, cfg);

    json j;
    j["scenario"] = cfg.name;
    j["seed"] = cfg.seed;
    j["cumulative_reward"] = ep.report.cumulative_reward;
    j["benchmark_available"] = ep.report.benchmark_available;
    if (ep.report.benchmark_available) {
        j["benchmark"] = ep.report.benchmark;
        j["regret"] = ep.report.regret;
    } else {
        j["benchmark"] = "unavailable";
    }
    j["final_entropy"] = ep.report.final_entropy;
    j["entropy_margin"] = ep.report.entropy_margin;
    j["epsilon_hat"] = ep.report.epsilon_hat;
    j["xi_over_budget"] = ep.report.xi_over_budget;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_learn(const std::string& family, int n, int degree, double alpha, double beta,
              bool exact, std::uint64_t seed, const std::string& model_path,
              const std::string& out_path) {
    Rng rng(seed);
    ModelPtr truth = model_path.empty() ? random_model(family, n, degree, 0.2, rng)
                                        : load_model_file(model_path);
    if (truth->dim() != n) throw std::runtime_error("model dimension does not match --n");

    QueryPlan plan = plan_queries(family, n, degree, alpha);
    QueryAnswers answers = exact ? exact_answers(*truth, plan)
                                 : noisy_answers(*truth, plan, beta, rng);
    Hypothesis hyp = fit_hypothesis(plan, answers, exact ? 0.0 : beta);

    // Coarsen the evaluation grid as n grows; the fine grid explodes
    // combinatorially past n = 5.
    double grid_step = n <= 5 ? 1e-2 : (n <= 8 ? 0.05 : 0.1);
    double grid_err = hypothesis_error(*hyp.model, *truth, simplex_grid(n, grid_step));

    json j;
    j["family"] = family;
    j["n"] = n;
    j["degree"] = degree;
    j["alpha"] = plan.alpha;
    j["queries"] = plan.points.size();
    j["beta"] = exact ? 0.0 : beta;
    j["epsilon_hat"] = hyp.epsilon_hat;
    j["grid_error"] = grid_err;
    j["degenerate"] = hyp.degenerate;
    j["plan_digest"] = hyp.plan_digest;
    emit(j, out_path);
    return 0;
}

int cmd_eird(int n, int k, const std::string& model_path, int probe_count, std::uint64_t seed,
             const std::string& point_csv, const std::string& out_path) {
    json j;
    j["n"] = n;
    j["k"] = k;
    j["ball_radius"] = eird_ball_radius(n, k);
    if (!model_path.empty()) {
        ModelPtr model = load_model_file(model_path);
        Rng rng(seed);
        auto probes = default_probe_set(n, probe_count, rng);
        MenuCatalog catalog(n, k);
        auto test_point = [&](const SimplexVector& x, const std::string& tag) {
            EirdMembership mem = eird_membership_estimate(*model, x, probes, catalog);
            j[tag] = {{"member", mem.member}, {"max_distance", mem.max_distance}};
        };
        test_point(SimplexVector::uniform(n), "uniform");
        if (!point_csv.empty()) {
            Vector x(n);
            std::stringstream ss(point_csv);
            std::string cell;
            for (int i = 0; i < n; ++i) {
                if (!std::getline(ss, cell, ',')) throw std::runtime_error("--point needs n values");
                x[i] = std::stod(cell);
            }
            test_point(SimplexVector(x), "point");
        }
    }
    emit(j, out_path);
    return 0;
}

int cmd_lowerbound(int which, std::int64_t T, const std::string& strategy, std::uint64_t seed,
                   const std::string& out_path) {
    Rng rng(seed);
    LowerBoundStrategy strat = parse_strategy(strategy);
    Rng rng_full = rng.split("full");
    Rng rng_half = rng.split("half");
    LowerBoundResult full = run_lower_bound_scenario(which, T, strat, rng_full);
    LowerBoundResult half = run_lower_bound_scenario(which, T / 2, strat, rng_half);

    json j;
    j["construction"] = which;
    j["strategy"] = strategy_name(strat);
    j["T"] = T;
    j["t_star"] = full.t_star;
    j["reward"] = full.reward;
    j["benchmark"] = full.benchmark;
    j["regret"] = full.regret;
    j["regret_half_horizon"] = half.regret;
    j["regret_ratio"] = half.regret != 0.0 ? full.regret / half.regret : 0.0;
    j["reward_scale"] = {{"lo", full.reward_lo}, {"hi", full.reward_hi}};
    j["regret_curve_stride"] = full.curve_stride;
    j["regret_curve"] = full.regret_curve;
    emit(j, out_path);
    return 0;
}

int cmd_optimize(int dim, std::int64_t T, double r, std::uint64_t seed,
                 const std::string& out_path) {
    // Synthetic run: fixed linear loss over a ball, bandit feedback.
    Rng rng(seed);
    Vector g = sphere_sample(dim, rng);
    auto loss = [&](const Vector& y) { return 0.5 + 0.5 * g.dot(y) / r; };

    FkmSchedule sched = default_schedule(T, 2.0 * r, dim, r);
    FkmConfig cfg;
    cfg.horizon = T;
    cfg.dim = dim;
    cfg.eta = sched.eta;
    cfg.delta = sched.delta;
    cfg.eps = 0.0;
    cfg.r = r;
    cfg.D = 2.0 * r;
    FkmOptimizer opt(cfg);

    DecisionSet set(dim);
    set.add_pinned(std::make_shared<BallComponent>(Vector::Zero(dim), r));

    double total = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
        Vector y = opt.propose_action(rng);
        double phi = loss(y);
        total += phi;
        opt.observe_loss(phi, set);
    }
    // Best fixed point of a linear loss over the ball: -r * g / |g|.
    double best = static_cast<double>(T) * loss(-r * g / g.norm());
    json j;
    j["dim"] = dim;
    j["T"] = T;
    j["r"] = r;
    j["eta"] = cfg.eta;
    j["delta"] = cfg.delta;
    j["total_loss"] = total;
    j["best_fixed_loss"] = best;
    j["regret"] = total - best;
    emit(j, out_path);
    return 0;
}

int cmd_report(const std::string& trace_path, const std::string& csv_path) {
    std::vector<RoundRecord> trace = read_trace_jsonl(trace_path);
    trace_to_csv(trace, csv_path);
    std::cout << "wrote " << trace.size() << " rows to " << csv_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"menu-recommendation game: simulation and optimization toolkit"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_trace, sim_report, sim_csv;
    std::int64_t sim_seed = 0;
    double sim_mesh = 0.02;
    bool sim_no_benchmark = false;
    auto* sim = app.add_subcommand("simulate", "run a full adaptive-agent episode");
    sim->add_option("--config", sim_config, "scenario config (JSON)")->required();
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "override the config seed");
    sim->add_option("--trace", sim_trace, "write JSONL trace here");
    sim->add_option("--report", sim_report, "write JSON report here");
    sim->add_option("--csv", sim_csv, "write per-round CSV here");
    sim->add_option("--mesh", sim_mesh, "benchmark oracle mesh step");
    sim->add_flag("--no-benchmark", sim_no_benchmark, "skip the mesh-oracle benchmark");

    // learn
    std::string learn_family = "bup", learn_model, learn_out;
    int learn_n = 3, learn_d = 1;
    double learn_alpha = 0.05, learn_beta = 0.0;
    bool learn_exact = false;
    std::uint64_t learn_seed = 0;
    auto* learn = app.add_subcommand("learn", "fit a preference model from score queries");
    learn->add_option("--family", learn_family, "bup | bmlp | bnmp | sfr")->required();
    learn->add_option("--n", learn_n, "item count")->required();
    learn->add_option("--d", learn_d, "degree (sparsity for sfr)");
    learn->add_option("--alpha", learn_alpha, "query-ball radius");
    learn->add_option("--beta", learn_beta, "per-query noise bound");
    learn->add_flag("--exact", learn_exact, "exact-query regime");
    learn->add_option("--seed", learn_seed, "rng seed");
    learn->add_option("--model", learn_model, "truth model file (default: random instance)");
    learn->add_option("--out", learn_out, "write the JSON report here (default stdout)");

    // eird
    int eird_n = 0, eird_k = 2, eird_probes = 64;
    std::string eird_model, eird_point, eird_out;
    std::uint64_t eird_seed = 0;
    auto* eird = app.add_subcommand("eird", "ball radius and probe membership report");
    eird->add_option("--n", eird_n, "item count")->required();
    eird->add_option("--k", eird_k, "menu size");
    eird->add_option("--model", eird_model, "model file for membership probes");
    eird->add_option("--probes", eird_probes, "random probe count");
    eird->add_option("--seed", eird_seed, "rng seed");
    eird->add_option("--point", eird_point, "comma-separated point to test");
    eird->add_option("--out", eird_out, "write the JSON report here (default stdout)");

    // lowerbound
    int lb_which = 1;
    std::int64_t lb_T = 40000;
    std::string lb_strategy = "greedy-myopic", lb_out;
    std::uint64_t lb_seed = 0;
    auto* lb = app.add_subcommand("lowerbound", "linear-regret construction scenarios");
    lb->add_option("--which", lb_which, "construction 1 or 2")->required();
    lb->add_option("--T", lb_T, "horizon");
    lb->add_option("--strategy", lb_strategy,
                   "greedy-myopic | best-fixed-menu-distribution | oracle-IRD-chaser");
    lb->add_option("--seed", lb_seed, "rng seed");
    lb->add_option("--out", lb_out, "write the JSON report here (default stdout)");

    // optimize
    int opt_dim = 4;
    std::int64_t opt_T = 10000;
    double opt_r = 1.0;
    std::uint64_t opt_seed = 0;
    std::string opt_out;
    auto* opt = app.add_subcommand("optimize", "bandit optimizer on a synthetic ball");
    opt->add_option("--dim", opt_dim, "dimension");
    opt->add_option("--T", opt_T, "horizon");
    opt->add_option("--r", opt_r, "ball radius");
    opt->add_option("--seed", opt_seed, "rng seed");
    opt->add_option("--out", opt_out, "write the JSON report here (default stdout)");

    // report
    std::string rep_trace, rep_csv;
    auto* rep = app.add_subcommand("report", "aggregate a JSONL trace into a CSV curve");
    rep->add_option("--trace", rep_trace, "input JSONL trace")->required();
    rep->add_option("--csv", rep_csv, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            return cmd_simulate(sim_config, sim_seed, sim_seed_opt->count() > 0, sim_trace,
                                sim_report, sim_csv, sim_mesh, sim_no_benchmark);
        if (*learn)
            return cmd_learn(learn_family, learn_n, learn_d, learn_alpha, learn_beta,
                             learn_exact, learn_seed, learn_model, learn_out);
        if (*eird)
            return cmd_eird(eird_n, eird_k, eird_model, eird_probes, eird_seed, eird_point,
                            eird_out);
        if (*lb) return cmd_lowerbound(lb_which, lb_T, lb_strategy, lb_seed, lb_out);
        if (*opt) return cmd_optimize(opt_dim, opt_T, opt_r, opt_seed, opt_out);
        if (*rep) return cmd_report(rep_trace, rep_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
