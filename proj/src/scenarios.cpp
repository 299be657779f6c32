#include "menurec/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "menurec/geometry.hpp"
#include "menurec/local_learning.hpp"
#include "menurec/menu_solver.hpp"

namespace menurec {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Reward streams

void RewardStream::validate(int n) const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (kind == "constant") {
        if (!in_unit(value)) throw std::invalid_argument("RewardStream: value outside [0,1]");
    } else if (kind == "two-phase") {
        if (!in_unit(alpha) || !in_unit(beta))
            throw std::invalid_argument("RewardStream: alpha/beta outside [0,1]");
        if (t_star < 0) throw std::invalid_argument("RewardStream: t_star must be >= 0");
        for (int i : items_phase1)
            if (i < 0 || i >= n) throw std::invalid_argument("RewardStream: phase-1 item out of range");
        for (int i : items_phase2)
            if (i < 0 || i >= n) throw std::invalid_argument("RewardStream: phase-2 item out of range");
    } else if (kind == "table") {
        if (table.empty()) throw std::invalid_argument("RewardStream: empty table");
        for (const auto& row : table) {
            if (static_cast<int>(row.size()) != n)
                throw std::invalid_argument("RewardStream: table row width != n");
            for (double x : row)
                if (!in_unit(x)) throw std::invalid_argument("RewardStream: table value outside [0,1]");
        }
    } else if (kind == "adaptive") {
        if (period < 1) throw std::invalid_argument("RewardStream: period must be >= 1");
    } else {
        throw std::invalid_argument("RewardStream: unknown kind '" + kind + "'");
    }
}

RewardFn RewardStream::to_fn(int n) const {
    validate(n);
    if (kind == "constant") {
        double v = value;
        return [v](std::int64_t, int) { return v; };
    }
    if (kind == "two-phase") {
        auto p1 = items_phase1;
        auto p2 = items_phase2;
        double a = alpha, b = beta;
        std::int64_t ts = t_star;
        return [p1, p2, a, b, ts](std::int64_t t, int item) {
            const auto& active = t <= ts ? p1 : p2;
            double pay = t <= ts ? a : b;
            return std::find(active.begin(), active.end(), item) != active.end() ? pay : 0.0;
        };
    }
    if (kind == "table") {
        auto rows = table;
        return [rows](std::int64_t t, int item) {
            std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(t - 1), rows.size() - 1);
            return rows[r][static_cast<std::size_t>(item)];
        };
    }
    // adaptive stub: deterministic rotating target.
    std::int64_t per = period;
    return [per, n](std::int64_t t, int item) {
        return ((t - 1) / per) % n == item ? 1.0 : 0.0;
    };
}

// ---------------------------------------------------------------------------
// Scenario configs

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw std::invalid_argument(where + ": unknown field '" + it.key() + "'");
}

RewardStream rewards_from_json(const json& j) {
    RewardStream rs;
    reject_unknown(j, {"kind", "value", "alpha", "beta", "t_star", "items_phase1",
                       "items_phase2", "table", "period"},
                   "rewards");
    rs.kind = j.value("kind", std::string("constant"));
    if (j.contains("value")) rs.value = j["value"].get<double>();
    if (j.contains("alpha")) rs.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) rs.beta = j["beta"].get<double>();
    if (j.contains("t_star")) rs.t_star = j["t_star"].get<std::int64_t>();
    if (j.contains("items_phase1")) rs.items_phase1 = j["items_phase1"].get<std::vector<int>>();
    if (j.contains("items_phase2")) rs.items_phase2 = j["items_phase2"].get<std::vector<int>>();
    if (j.contains("table")) rs.table = j["table"].get<std::vector<std::vector<double>>>();
    if (j.contains("period")) rs.period = j["period"].get<std::int64_t>();
    return rs;
}

json rewards_to_json(const RewardStream& rs) {
    json j{{"kind", rs.kind}};
    if (rs.kind == "constant") {
        j["value"] = rs.value;
    } else if (rs.kind == "two-phase") {
        j["alpha"] = rs.alpha;
        j["beta"] = rs.beta;
        j["t_star"] = rs.t_star;
        j["items_phase1"] = rs.items_phase1;
        j["items_phase2"] = rs.items_phase2;
    } else if (rs.kind == "table") {
        j["table"] = rs.table;
    } else if (rs.kind == "adaptive") {
        j["period"] = rs.period;
    }
    return j;
}

json overrides_to_json(const ScheduleOverrides& ov) {
    json j = json::object();
    if (ov.t_pad) j["t_pad"] = *ov.t_pad;
    if (ov.t_move) j["t_move"] = *ov.t_move;
    if (ov.t_query) j["t_query"] = *ov.t_query;
    if (ov.sessions) j["sessions"] = *ov.sessions;
    if (ov.alpha) j["alpha"] = *ov.alpha;
    if (ov.eps) j["eps"] = *ov.eps;
    if (ov.r) j["r"] = *ov.r;
    if (ov.retained_cap) j["retained_cap"] = *ov.retained_cap;
    if (ov.f_ll) j["f_ll"] = *ov.f_ll;
    return j;
}

ScheduleOverrides overrides_from_json(const json& j) {
    ScheduleOverrides ov;
    reject_unknown(j, {"t_pad", "t_move", "t_query", "sessions", "alpha", "eps", "r",
                       "retained_cap", "f_ll"},
                   "overrides");
    if (j.contains("t_pad")) ov.t_pad = j["t_pad"].get<std::int64_t>();
    if (j.contains("t_move")) ov.t_move = j["t_move"].get<std::int64_t>();
    if (j.contains("t_query")) ov.t_query = j["t_query"].get<std::int64_t>();
    if (j.contains("sessions")) ov.sessions = j["sessions"].get<int>();
    if (j.contains("alpha")) ov.alpha = j["alpha"].get<double>();
    if (j.contains("eps")) ov.eps = j["eps"].get<double>();
    if (j.contains("r")) ov.r = j["r"].get<double>();
    if (j.contains("retained_cap")) ov.retained_cap = j["retained_cap"].get<int>();
    if (j.contains("f_ll")) ov.f_ll = j["f_ll"].get<double>();
    return ov;
}

}  // namespace

ModelPtr ScenarioConfig::load_model() const {
    if (!model_file.empty() && !model_json.empty())
        throw std::invalid_argument("ScenarioConfig: both model_file and inline model given");
    if (!model_file.empty()) return load_model_file(model_file);
    if (!model_json.empty()) return model_from_json(model_json);
    throw std::invalid_argument("ScenarioConfig: no model specified");
}

ScenarioConfig parse_scenario_config(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"name", "model_file", "model", "n", "k", "T", "c", "family", "degree",
                       "lambda", "rewards", "seed", "overrides", "output_dir"},
                   "config");
    ScenarioConfig cfg;
    cfg.name = j.value("name", std::string("episode"));
    cfg.model_file = j.value("model_file", std::string());
    if (j.contains("model")) cfg.model_json = j["model"].dump();
    cfg.n = j.at("n").get<int>();
    cfg.k = j.value("k", 2);
    cfg.T = j.at("T").get<std::int64_t>();
    cfg.c = j.value("c", 0.0);
    cfg.family = j.value("family", std::string("bup"));
    cfg.degree = j.value("degree", 1);
    cfg.lambda = j.value("lambda", 0.0);
    if (j.contains("rewards")) cfg.rewards = rewards_from_json(j["rewards"]);
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("overrides")) cfg.overrides = overrides_from_json(j["overrides"]);
    cfg.output_dir = j.value("output_dir", std::string("."));
    cfg.rewards.validate(cfg.n);
    return cfg;
}

std::string serialize_scenario_config(const ScenarioConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    if (!cfg.model_file.empty()) j["model_file"] = cfg.model_file;
    if (!cfg.model_json.empty()) j["model"] = json::parse(cfg.model_json);
    j["n"] = cfg.n;
    j["k"] = cfg.k;
    j["T"] = cfg.T;
    j["c"] = cfg.c;
    j["family"] = cfg.family;
    j["degree"] = cfg.degree;
    j["lambda"] = cfg.lambda;
    j["rewards"] = rewards_to_json(cfg.rewards);
    j["seed"] = cfg.seed;
    json ov = overrides_to_json(cfg.overrides);
    if (!ov.empty()) j["overrides"] = ov;
    j["output_dir"] = cfg.output_dir;
    return j.dump(2) + "\n";
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_config(ss.str());
}

// ---------------------------------------------------------------------------
// Mesh oracle

OracleResult oracle_best_point(const PreferenceModel& model, double c, const RewardFn& rewards,
                               std::int64_t T, double mesh_step,
                               const std::vector<SimplexVector>& probes,
                               double membership_tol) {
    const int n = model.dim();
    if (n > 6) throw std::invalid_argument("oracle_best_point: mesh oracle limited to n <= 6");
    Vector totals = Vector::Zero(n);
    for (std::int64_t t = 1; t <= T; ++t)
        for (int i = 0; i < n; ++i) totals[i] += rewards(t, i);

    std::vector<SimplexVector> grid = simplex_grid(n, mesh_step);
    std::vector<std::pair<double, std::size_t>> feasible;
    feasible.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (entropy(grid[g]) < c) continue;
        feasible.emplace_back(grid[g].coords().dot(totals), g);
    }
    if (feasible.empty())
        throw std::runtime_error("oracle_best_point: no mesh point satisfies the entropy bound");
    std::sort(feasible.begin(), feasible.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    MenuCatalog catalog(n, 2);
    // Probe-based membership only for the leading candidates; the first
    // accepted point is the mesh optimum.
    std::int64_t scanned = 0;
    for (const auto& [objective, g] : feasible) {
        ++scanned;
        EirdMembership mem =
            eird_membership_estimate(model, grid[g], probes, catalog, membership_tol);
        if (!mem.member) continue;
        OracleResult out{grid[g],
                         objective,
                         mesh_step,
                         entropy(grid[g]) - c,
                         mem.max_distance,
                         scanned,
                         static_cast<std::int64_t>(feasible.size())};
        return out;
    }
    throw std::runtime_error(
        "oracle_best_point: no entropy-feasible mesh point passed the membership probes; "
        "refine the mesh or relax the tolerance");
}

// ---------------------------------------------------------------------------
// Lower-bound constructions

LowerBoundStrategy parse_strategy(const std::string& name) {
    if (name == "greedy-myopic") return LowerBoundStrategy::kGreedyMyopic;
    if (name == "best-fixed-menu-distribution")
        return LowerBoundStrategy::kBestFixedMenuDistribution;
    if (name == "oracle-IRD-chaser") return LowerBoundStrategy::kOracleIrdChaser;
    throw std::invalid_argument("unknown strategy '" + name + "'");
}

std::string strategy_name(LowerBoundStrategy s) {
    switch (s) {
        case LowerBoundStrategy::kGreedyMyopic: return "greedy-myopic";
        case LowerBoundStrategy::kBestFixedMenuDistribution:
            return "best-fixed-menu-distribution";
        case LowerBoundStrategy::kOracleIrdChaser: return "oracle-IRD-chaser";
    }
    throw std::logic_error("unreachable");
}

namespace {

struct ConstructionParams {
    int n = 6;
    int k = 2;
    double lambda = 0.05;
    double eps = 0.1;   // construction 2 only
    double alpha = 0.0;
    double beta = 0.0;
    std::int64_t t_star = 0;
};

/// Raw (possibly negative) per-round rewards of the two constructions.
double raw_reward(int which, const ConstructionParams& p, std::int64_t t, int item) {
    if (which == 1) {
        if (t <= p.t_star) return item == 0 ? p.alpha : 0.0;
        return item == 1 ? p.beta : 0.0;
    }
    if (t <= p.t_star) return item <= 1 ? p.alpha : 0.0;
    if (item == 2) return p.beta;
    if (item == 1) return 0.0;
    return -p.beta;
}

double expected_menu_reward(int which, const ConstructionParams& p, const PreferenceModel& m,
                            const SimplexVector& v, const Menu& menu, std::int64_t t) {
    SimplexVector sel = selection_distribution(m, v, menu);
    double r = 0.0;
    for (int i : menu.items()) r += sel[i] * raw_reward(which, p, t, i);
    return r;
}

/// Deterministic mean-field run of one fixed menu: expected memory evolves by
/// adding the full selection distribution each round.
std::vector<double> mean_field_curve(int which, const ConstructionParams& p,
                                     const PreferenceModel& m, const Menu& menu,
                                     std::int64_t T) {
    Vector h = Vector::Zero(p.n);
    std::vector<double> cum(static_cast<std::size_t>(T));
    double total = 0.0;
    for (std::int64_t t = 1; t <= T; ++t) {
        SimplexVector v = t == 1 ? SimplexVector::uniform(p.n) : SimplexVector::normalized(h);
        SimplexVector sel = selection_distribution(m, v, menu);
        for (int i : menu.items()) total += sel[i] * raw_reward(which, p, t, i);
        h += sel.coords();
        cum[static_cast<std::size_t>(t - 1)] = total;
    }
    return cum;
}

}  // namespace

LowerBoundResult run_lower_bound_scenario(int which, std::int64_t T, LowerBoundStrategy strategy,
                                          Rng& rng) {
    if (which != 1 && which != 2)
        throw std::invalid_argument("run_lower_bound_scenario: which must be 1 or 2");
    if (T < 0) throw std::invalid_argument("run_lower_bound_scenario: negative horizon");

    ConstructionParams p;
    if (which == 1) {
        p.alpha = 0.04;
        p.beta = 0.88;
        p.t_star = T / 2;
    } else {
        p.alpha = 0.05;
        p.beta = 0.9;
        p.t_star = (2 * T) / 3;
    }

    LowerBoundResult out;
    out.which = which;
    out.strategy = strategy;
    out.T = T;
    out.t_star = p.t_star;
    out.reward_lo = which == 2 ? -p.beta : 0.0;
    out.reward_hi = std::max(p.alpha, p.beta);
    if (T == 0) return out;

    ModelPtr model = build_lower_bound_model(which, p.n, p.lambda, p.eps);
    MenuCatalog catalog(p.n, p.k);
    SimplexVector v_u = SimplexVector::uniform(p.n);

    // Forbidden benchmark cumulative curve.
    std::vector<double> bench_cum(static_cast<std::size_t>(T));
    if (which == 1) {
        // Best fixed item distribution in IRD(v_U): a vertex of the hull.
        std::int64_t best = 0;
        double best_total = -1e300;
        Vector totals = Vector::Zero(p.n);
        for (std::int64_t t = 1; t <= T; ++t)
            for (int i = 0; i < p.n; ++i) totals[i] += raw_reward(which, p, t, i);
        for (std::int64_t j = 0; j < catalog.size(); ++j) {
            double v = selection_distribution(*model, v_u, catalog.menu(j)).coords().dot(totals);
            if (v > best_total) {
                best_total = v;
                best = j;
            }
        }
        SimplexVector x_b = selection_distribution(*model, v_u, catalog.menu(best));
        double cum = 0.0;
        for (std::int64_t t = 1; t <= T; ++t) {
            for (int i = 0; i < p.n; ++i) cum += x_b[i] * raw_reward(which, p, t, i);
            bench_cum[static_cast<std::size_t>(t - 1)] = cum;
        }
    } else {
        // Best fixed menu, accounting for the memory dynamics it induces.
        double best_total = -1e300;
        std::int64_t best = 0;
        for (std::int64_t j = 0; j < catalog.size(); ++j) {
            std::vector<double> cum = mean_field_curve(which, p, *model, catalog.menu(j), T);
            if (cum.back() > best_total) {
                best_total = cum.back();
                best = j;
            }
        }
        bench_cum = mean_field_curve(which, p, *model, catalog.menu(best), T);
    }

    // Fixed strategy of the best-fixed policy: chosen on round-1 rewards only.
    std::int64_t fixed_menu = 0;
    if (strategy == LowerBoundStrategy::kBestFixedMenuDistribution) {
        double best_v = -1e300;
        for (std::int64_t j = 0; j < catalog.size(); ++j) {
            double v = expected_menu_reward(which, p, *model, v_u, catalog.menu(j), 1);
            if (v > best_v) {
                best_v = v;
                fixed_menu = j;
            }
        }
    }

    // Expected-value (mean-field) simulation of the strategy: the memory
    // accumulates the full selection distribution each round, mirroring the
    // benchmark's treatment. The theorem lower-bounds expected regret; the
    // expectation path avoids the construction's near-martingale memory
    // drift, whose per-run variance would swamp a single sampled run.
    (void)rng;
    Vector h = Vector::Zero(p.n);
    double reward = 0.0;
    out.curve_stride = std::max<std::int64_t>(1, T / 1000);
    out.regret_curve.reserve(static_cast<std::size_t>(T / out.curve_stride) + 1);

    for (std::int64_t t = 1; t <= T; ++t) {
        SimplexVector v = t == 1 ? v_u : SimplexVector::normalized(h);
        Vector p_round;
        if (strategy == LowerBoundStrategy::kGreedyMyopic) {
            std::int64_t menu_idx = 0;
            double best_v = -1e300;
            for (std::int64_t j = 0; j < catalog.size(); ++j) {
                double val = expected_menu_reward(which, p, *model, v, catalog.menu(j), t);
                if (val > best_v) {
                    best_v = val;
                    menu_idx = j;
                }
            }
            p_round = selection_distribution(*model, v, catalog.menu(menu_idx)).coords();
        } else if (strategy == LowerBoundStrategy::kOracleIrdChaser) {
            // Chase the best vertex of IRD(v_U) for this round's rewards,
            // inducing it as closely as the current memory allows.
            double best_v = -1e300;
            std::int64_t target = 0;
            for (std::int64_t j = 0; j < catalog.size(); ++j) {
                SimplexVector sel = selection_distribution(*model, v_u, catalog.menu(j));
                double val = 0.0;
                for (int i = 0; i < p.n; ++i) val += sel[i] * raw_reward(which, p, t, i);
                if (val > best_v) {
                    best_v = val;
                    target = j;
                }
            }
            SimplexVector x_star = selection_distribution(*model, v_u, catalog.menu(target));
            InductionSolution sol = solve_play_dist(*model, v, x_star, catalog);
            p_round = Vector::Zero(p.n);
            const Vector& z = sol.z.weights();
            for (std::int64_t j = 0; j < catalog.size(); ++j)
                if (z[j] > 0.0)
                    p_round += z[j] * selection_distribution(*model, v, catalog.menu(j)).coords();
        } else {
            p_round = selection_distribution(*model, v, catalog.menu(fixed_menu)).coords();
        }
        for (int i = 0; i < p.n; ++i) reward += p_round[i] * raw_reward(which, p, t, i);
        h += p_round;
        if (t % out.curve_stride == 0 || t == T)
            out.regret_curve.push_back(bench_cum[static_cast<std::size_t>(t - 1)] - reward);
    }

    out.reward = reward;
    out.benchmark = bench_cum.back();
    out.regret = out.benchmark - out.reward;
    return out;
}

// ---------------------------------------------------------------------------
// Random instances

ModelPtr random_model(const std::string& family, int n, int degree, double lambda, Rng& rng) {
    if (degree < 1) throw std::invalid_argument("random_model: degree must be >= 1");
    if (lambda < 0.0 || lambda > 0.6)
        throw std::invalid_argument("random_model: lambda outside [0, 0.6]");
    const double amp = std::min(0.15, (0.9 - lambda) / 3.0);
    auto base_score = [&] {
        double lo = lambda + amp + 0.05;
        double hi = std::min(0.95 - amp, lo + 0.3);
        return lo + (hi - lo) * rng.uniform();
    };
    auto centered = [&](double a) { return a * (2.0 * rng.uniform() - 1.0); };

    if (family == "bup") {
        std::vector<std::vector<double>> coeffs(n);
        for (int i = 0; i < n; ++i) {
            coeffs[i].resize(degree + 1);
            coeffs[i][0] = base_score();
            for (int p = 1; p <= degree; ++p) coeffs[i][p] = centered(amp / degree);
        }
        return std::make_shared<BupModel>(std::move(coeffs), lambda);
    }
    if (family == "bmlp") {
        std::vector<std::vector<Monomial>> polys(n);
        for (int i = 0; i < n; ++i) {
            polys[i].push_back({{}, base_score()});
            // Singleton terms; their convex combination over Delta(n) is
            // bounded by the largest coefficient.
            for (int j = 0; j < n; ++j) polys[i].push_back({{j}, centered(amp * 0.6)});
            if (degree >= 2 && n >= 3) {
                // Keep product terms off the last item so the model stays
                // multilinear after v_n is eliminated; products through v_n
                // are not identifiable from diagonal query lines.
                int a = static_cast<int>(rng.below(n - 1));
                int b = static_cast<int>(rng.below(n - 2));
                if (b >= a) ++b;
                std::vector<int> vars{std::min(a, b), std::max(a, b)};
                polys[i].push_back({vars, centered(amp * 0.4)});
            }
        }
        return std::make_shared<MultivariatePolyModel>(n, std::move(polys), lambda, true,
                                                       std::nullopt);
    }
    if (family == "bnmp") {
        // f_i = base_i + q_i - mean_j(q_j): the corrections sum to zero
        // identically, so the score sum is the constant sum of the bases.
        std::vector<std::vector<Monomial>> q(n);
        const double amp_q = amp / (2.0 * degree);
        for (int i = 0; i < n; ++i)
            for (int m = 0; m < degree; ++m) {
                int len = 1 + static_cast<int>(rng.below(degree));
                std::vector<int> vars(len);
                for (int& v : vars) v = static_cast<int>(rng.below(n));
                std::sort(vars.begin(), vars.end());
                q[i].push_back({std::move(vars), centered(amp_q)});
            }
        double sum = 0.0;
        std::vector<std::vector<Monomial>> polys(n);
        for (int i = 0; i < n; ++i) {
            double b = base_score();
            sum += b;
            polys[i].push_back({{}, b});
            for (const auto& mono : q[i]) polys[i].push_back(mono);
            for (int j = 0; j < n; ++j)
                for (const auto& mono : q[j])
                    polys[i].push_back({mono.vars, -mono.coeff / n});
        }
        return std::make_shared<MultivariatePolyModel>(n, std::move(polys), lambda, false, sum);
    }
    if (family == "sfr") {
        const double freq_bound = 8.0;
        std::vector<std::vector<SfrModel::Component>> comps(n);
        // degree = sparsity: the number of exponential terms counting the DC
        // term and each half of a conjugate pair separately.
        int pairs = (degree - 1) / 2;
        double lipschitz = 0.0;
        for (int i = 0; i < n; ++i) {
            comps[i].push_back({0.0, base_score()});
            // Distinct integer frequencies: separation 1 by construction.
            std::vector<int> freqs;
            while (static_cast<int>(freqs.size()) < pairs) {
                int f = 1 + static_cast<int>(rng.below(static_cast<int>(freq_bound)));
                if (std::find(freqs.begin(), freqs.end(), f) == freqs.end()) freqs.push_back(f);
            }
            for (int f : freqs) {
                double rho = (0.2 + 0.8 * rng.uniform()) * amp / (2.0 * std::max(1, pairs));
                double theta = 2.0 * std::numbers::pi * rng.uniform();
                comps[i].push_back({static_cast<double>(f),
                                    std::polar(rho, theta)});
                lipschitz = std::max(lipschitz, 2.0 * rho * 2.0 * std::numbers::pi * f);
            }
        }
        // Distinct integers (plus DC) keep every pairwise gap >= 1; declare
        // slightly less, the constructor requires a strict margin.
        return std::make_shared<SfrModel>(std::move(comps), lambda, freq_bound, 0.9, lipschitz);
    }
    throw std::invalid_argument("random_model: unknown family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Persistence

void write_trace_jsonl(const std::string& path, const std::vector<RoundRecord>& trace,
                       const ScenarioConfig& cfg) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot open trace file for writing: " + path);
    json header{{"schema", "menurec-trace"}, {"version", kTraceSchemaVersion},
                {"name", cfg.name},          {"n", cfg.n},
                {"k", cfg.k},                {"T", cfg.T},
                {"seed", cfg.seed}};
    outf << header.dump() << '\n';
    for (const RoundRecord& r : trace) {
        json row{{"t", r.t},
                 {"phase", std::string(1, r.phase)},
                 {"menu", r.menu},
                 {"chosen", r.chosen},
                 {"reward", r.reward},
                 {"loss", r.loss},
                 {"memory_digest", r.memory_digest},
                 {"decision_set_size", r.decision_set_size},
                 {"entropy", r.entropy_v}};
        outf << row.dump() << '\n';
    }
}

std::vector<RoundRecord> read_trace_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
    json header = json::parse(line);
    if (header.value("schema", std::string()) != "menurec-trace" ||
        header.value("version", -1) != kTraceSchemaVersion)
        throw std::runtime_error("unrecognized trace schema in " + path);
    std::vector<RoundRecord> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json row = json::parse(line);
        RoundRecord r;
        r.t = row.at("t").get<std::int64_t>();
        r.phase = row.at("phase").get<std::string>().at(0);
        r.menu = row.at("menu").get<std::vector<int>>();
        r.chosen = row.at("chosen").get<int>();
        r.reward = row.at("reward").get<double>();
        r.loss = row.at("loss").get<double>();
        r.memory_digest = row.at("memory_digest").get<std::uint64_t>();
        r.decision_set_size = row.at("decision_set_size").get<std::int64_t>();
        r.entropy_v = row.at("entropy").get<double>();
        trace.push_back(std::move(r));
    }
    return trace;
}

void write_report_json(const std::string& path, const RegretReport& report,
                       const ScenarioConfig& cfg) {
    json j;
    j["scenario"] = {{"name", cfg.name}, {"n", cfg.n},       {"k", cfg.k},
                     {"T", cfg.T},       {"c", cfg.c},       {"seed", cfg.seed}};
    j["cumulative_reward"] = report.cumulative_reward;
    j["benchmark_available"] = report.benchmark_available;
    if (report.benchmark_available) {
        j["benchmark"] = report.benchmark;
        j["regret"] = report.regret;
    } else {
        j["benchmark"] = "unavailable";
    }
    j["final_entropy"] = report.final_entropy;
    j["entropy_margin"] = report.entropy_margin;
    j["optimize_rounds"] = report.optimize_rounds;
    j["xi_over_budget"] = report.xi_over_budget;
    j["epsilon_hat"] = report.epsilon_hat;
    j["components_dropped"] = report.components_dropped;
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot open report file for writing: " + path);
    outf << j.dump(2) << '\n';
}

void trace_to_csv(const std::vector<RoundRecord>& trace, const std::string& path) {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot open csv file for writing: " + path);
    outf << "t,phase,chosen,reward,cum_reward,loss,entropy,decision_set_size\n";
    double cum = 0.0;
    for (const RoundRecord& r : trace) {
        cum += r.reward;
        outf << r.t << ',' << r.phase << ',' << r.chosen << ',' << r.reward << ',' << cum << ','
             << r.loss << ',' << r.entropy_v << ',' << r.decision_set_size << '\n';
    }
}

}  // namespace menurec
