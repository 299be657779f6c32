#include "menurec/orchestrator.hpp"

#include <algorithm>
#include <cmath>

#include "menurec/geometry.hpp"
#include "menurec/menu_solver.hpp"
#include "menurec/navigation.hpp"
#include "menurec/rcfkm.hpp"

namespace menurec {

double reward_to_loss(double reward) {
    if (reward < -1e-12 || reward > 1.0 + 1e-12)
        throw std::invalid_argument("reward_to_loss: reward outside [0,1]");
    return std::clamp(1.0 - reward, 0.0, 1.0);
}

void PhaseSchedule::validate() const {
    if (t_0 != t_pad + sessions * (2 * t_move + t_query))
        throw std::invalid_argument("PhaseSchedule: t_0 accounting mismatch");
    if (t_0 >= T) throw std::invalid_argument("PhaseSchedule: t_0 must be < T");
    double r_move = static_cast<double>(t_move) / static_cast<double>(t_0);
    double alpha_cap = (k - 1) / (2.0 * n * (n - 1)) * r_move;
    if (alpha > alpha_cap + 1e-12)
        throw std::invalid_argument("PhaseSchedule: alpha exceeds the steering-reach cap");
    if (eps >= r) throw std::invalid_argument("PhaseSchedule: eps must be < r");
}

PhaseSchedule compute_schedule(int n, int k, std::int64_t T, const std::string& family,
                               int degree, double c, double lambda,
                               const ScheduleOverrides& ov) {
    if (T < 1000) throw std::invalid_argument("compute_schedule: horizon too small (T >= 1000)");

    PhaseSchedule s;
    s.n = n;
    s.k = k;
    s.T = T;
    s.family = family;
    s.degree = degree;
    s.c = c;
    s.lambda = lambda;
    s.r = ov.r.value_or(eird_ball_radius(n, k));
    double t14 = std::pow(static_cast<double>(T), 0.25);
    s.eps = ov.eps.value_or(s.r / t14);
    s.delta_pad = s.delta_move = s.delta_query = 1.0 / t14;

    // Session count: one steering/query block per plan point. Plan geometry
    // only depends on alpha through point positions, so size it with a
    // placeholder alpha first.
    QueryPlan probe_plan = plan_queries(family, n, degree, 1e-3);
    s.sessions = ov.sessions.value_or(static_cast<int>(probe_plan.points.size()));

    // Desk-scale phase budgets (full formulas are Theta-tilde(1/eps^3) with
    // astronomically conservative constants); every value is overridable.
    // Budgets grow like T^{3/4} so the learning phases contribute sublinear
    // regret, matching the optimize phase's rate.
    double t34 = std::pow(static_cast<double>(T), 0.75);
    s.t_pad = ov.t_pad.value_or(std::max<std::int64_t>(1000, static_cast<std::int64_t>(t34 / 2)));
    s.t_move = ov.t_move.value_or(std::max<std::int64_t>(1000, static_cast<std::int64_t>(t34 / 2)));
    s.t_query =
        ov.t_query.value_or(std::max<std::int64_t>(500, static_cast<std::int64_t>(t34 / 2)));
    s.t_0 = s.t_pad + s.sessions * (2 * s.t_move + s.t_query);
    if (s.t_0 >= T / 2)
        throw std::invalid_argument(
            "compute_schedule: horizon too small for the learning phases; increase T or "
            "override the phase budgets");

    double r_move = static_cast<double>(s.t_move) / static_cast<double>(s.t_0);
    s.alpha = ov.alpha.value_or((k - 1) / (2.0 * n * (n - 1)) * r_move);

    s.f_ll = ov.f_ll.value_or(f_ll_constant(family, n, degree, s.alpha, lambda));
    s.f_q = 8.0 * std::sqrt(static_cast<double>(n)) * k * s.f_ll / std::max(lambda, 1e-6);
    // Implied query noise at this t_query (shape of the Appendix-G inversion
    // with the conversion constant normalized out).
    double log_term =
        std::log(2.0 * n * k * s.sessions / ((k - 1) * s.delta_query));
    s.beta = std::sqrt((2.0 * n / (k - 1)) * log_term / static_cast<double>(s.t_query));
    s.retained_cap = ov.retained_cap.value_or(512);
    s.validate();
    return s;
}

namespace {

std::uint64_t digest_counts(const Histogram& h) {
    std::uint64_t d = 1469598103934665603ull;
    for (std::int64_t c : h.counts()) {
        auto x = static_cast<std::uint64_t>(c);
        for (int b = 0; b < 8; ++b) {
            d ^= (x >> (8 * b)) & 0xff;
            d *= 1099511628211ull;
        }
    }
    return d;
}

int agent_choice(const PreferenceModel& truth, const Histogram& hist, const Menu& menu,
                 Rng& rng) {
    if (hist.total() == 0) {
        // Empty history: uniform scores, uniform pick over the menu.
        auto j = static_cast<std::size_t>(rng.below(menu.items().size()));
        return menu.items()[j];
    }
    return sample_choice(truth, hist.normalize(), menu, rng);
}

}  // namespace

EpisodeResult run_episode(const PreferenceModel& truth, const RewardFn& rewards,
                          const PhaseSchedule& schedule, std::uint64_t seed,
                          const std::optional<SimplexVector>& benchmark_point) {
    schedule.validate();
    const int n = schedule.n;
    const int k = schedule.k;
    if (truth.dim() != n) throw std::invalid_argument("run_episode: model dimension mismatch");
    MenuCatalog catalog(n, k);
    Rng rng(seed);
    Histogram hist(n);

    std::vector<RoundRecord> trace;
    trace.reserve(schedule.T);
    std::int64_t t = 0;
    double cum_reward = 0.0;
    double benchmark = 0.0;

    auto play_round = [&](char phase, const Menu& menu, std::int64_t set_size) {
        int choice = agent_choice(truth, hist, menu, rng);
        ++t;
        double rho = rewards(t, choice);
        if (rho < 0.0 || rho > 1.0)
            throw std::invalid_argument("run_episode: reward stream left [0,1]");
        cum_reward += rho;
        if (benchmark_point)
            for (int i = 0; i < n; ++i) benchmark += (*benchmark_point)[i] * rewards(t, i);
        hist.record(choice);
        RoundRecord rec;
        rec.t = t;
        rec.phase = phase;
        rec.menu = menu.items();
        rec.chosen = choice;
        rec.reward = rho;
        rec.loss = reward_to_loss(rho);
        rec.memory_digest = digest_counts(hist);
        rec.decision_set_size = set_size;
        rec.entropy_v = entropy(hist.normalize());
        trace.push_back(std::move(rec));
        return choice;
    };

    // --- Phase 1: UniformPad -------------------------------------------------
    for (std::int64_t i = 0; i < schedule.t_pad; ++i)
        play_round('p', uniform_pad_menu(hist, k, rng), 0);

    // --- Phase 2: S x (MoveTo, Query, MoveTo-back) ---------------------------
    QueryPlan plan = plan_queries(schedule.family, n, schedule.degree, schedule.alpha);
    if (static_cast<int>(plan.points.size()) != schedule.sessions)
        throw std::logic_error("run_episode: plan size does not match the schedule sessions");

    auto steer = [&](const SimplexVector& target_dist, std::int64_t rounds, char phase) {
        SteeringTarget target =
            SteeringTarget::from_distribution(target_dist, hist.total() + rounds);
        std::vector<std::int64_t> deficits(n);
        for (int i = 0; i < n; ++i)
            deficits[i] = std::max<std::int64_t>(0, target.counts[i] - hist.count(i));
        for (std::int64_t i = 0; i < rounds; ++i) {
            Menu menu = move_to_menu(deficits, hist, k, rng);
            int choice = play_round(phase, menu, 0);
            if (deficits[choice] > 0) --deficits[choice];
        }
    };

    QueryAnswers answers;
    answers.reserve(plan.points.size());
    SimplexVector uniform = SimplexVector::uniform(n);
    for (const SimplexVector& point : plan.points) {
        steer(point, schedule.t_move, 'm');
        QueryResult qr = run_query(truth, hist, k, schedule.t_query, rng,
                                   [&](const Menu& menu, int choice) {
                                       // run_query already sampled and recorded the
                                       // choice into hist; mirror it into the trace.
                                       ++t;
                                       double rho = rewards(t, choice);
                                       cum_reward += rho;
                                       if (benchmark_point)
                                           for (int i = 0; i < n; ++i)
                                               benchmark += (*benchmark_point)[i] * rewards(t, i);
                                       RoundRecord rec;
                                       rec.t = t;
                                       rec.phase = 'q';
                                       rec.menu = menu.items();
                                       rec.chosen = choice;
                                       rec.reward = rho;
                                       rec.loss = reward_to_loss(rho);
                                       rec.memory_digest = digest_counts(hist);
                                       rec.decision_set_size = 0;
                                       rec.entropy_v = entropy(hist.normalize());
                                       trace.push_back(std::move(rec));
                                   });
        answers.push_back(qr.estimate);
        steer(uniform, schedule.t_move, 'b');
    }

    // --- Fit -----------------------------------------------------------------
    Hypothesis hyp = fit_hypothesis(plan, answers, 0.0);
    // Project the fit into the dispersed class; a noisy fit can otherwise lose
    // the interior ball that the contracting projections need.
    hyp.model = std::make_shared<DispersionGuard>(hyp.model, schedule.lambda);

    // --- Phase 3: optimize ---------------------------------------------------
    const int chart_dim = n - 1;
    const std::int64_t t_opt = schedule.T - schedule.t_0;
    FkmSchedule fkm_sched = default_schedule(t_opt, 2.0, chart_dim, schedule.r);
    FkmConfig cfg;
    cfg.horizon = t_opt;
    cfg.dim = chart_dim;
    // Realized losses are sampled Agent choices, so the plain one-point
    // estimate drowns in Bernoulli noise at desk horizons. Widen the
    // exploration radius (same T^{-1/4} scaling, capped by the shrinkage
    // budget), average each direction over a batch of rounds, and center on a
    // running baseline; the gradient estimate stays unbiased throughout.
    cfg.batch = 32;
    cfg.eta = 0.3 * cfg.batch * fkm_sched.eta;
    cfg.delta = std::min(10.0 * fkm_sched.delta, 0.45 * (schedule.r - schedule.eps));
    cfg.eps = std::min(schedule.eps, 0.45 * schedule.r);
    cfg.r = schedule.r;
    cfg.baseline = true;
    FkmOptimizer opt(cfg);

    DecisionSet ds(chart_dim);
    ds.add_pinned(std::make_shared<EntropyComponent>(n, schedule.c));
    std::int64_t xi_over = 0;
    std::int64_t dropped = 0;

    for (std::int64_t i = 0; i < t_opt; ++i) {
        SimplexVector v_t = hist.normalize();
        Vector y_t = opt.propose_action(rng);
        SimplexVector x_target = from_chart(y_t);
        InductionSolution sol = solve_play_dist(*hyp.model, v_t, x_target, catalog);
        double xi = (to_chart(sol.induced) - y_t).norm() + hyp.epsilon_hat;
        if (xi > schedule.eps) ++xi_over;

        std::int64_t menu_idx = sol.z.sample(rng);
        const Menu& menu = catalog.menu(menu_idx);
        play_round('o', menu, static_cast<std::int64_t>(ds.component_count()));

        // Contract: K_{t+1} = K_t intersect IRD(v_t, M-hat), with the oldest
        // unpinned components dropped past the retention cap.
        SimplexVector v_next = hist.normalize();
        ds.add(std::make_shared<HullComponent>(ird_vertices(*hyp.model, v_next, catalog)));
        dropped += ds.retain_most_recent(static_cast<std::size_t>(schedule.retained_cap));
        double phi = trace.back().loss;
        opt.observe_loss(phi, ds);
    }

    EpisodeResult out{RegretReport{}, std::move(trace), hyp, hist.normalize()};
    out.report.cumulative_reward = cum_reward;
    out.report.benchmark_available = benchmark_point.has_value();
    out.report.benchmark = benchmark;
    out.report.regret = benchmark - cum_reward;
    out.report.final_entropy = entropy(out.final_memory);
    out.report.entropy_margin = out.report.final_entropy - schedule.c;
    out.report.optimize_rounds = t_opt;
    out.report.xi_over_budget = xi_over;
    out.report.epsilon_hat = hyp.epsilon_hat;
    out.report.components_dropped = dropped;
    return out;
}

}  // namespace menurec
