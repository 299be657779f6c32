#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "menurec/core_types.hpp"
#include "menurec/local_learning.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

/// Adversarial reward stream: reward in [0,1] for choosing `item` at round t
/// (1-based round index). Oblivious streams are plain closures over t.
using RewardFn = std::function<double(std::int64_t t, int item)>;

/// phi = 1 - rho; rewards are maximized, the optimizer minimizes losses.
double reward_to_loss(double reward);

struct ScheduleOverrides {
    std::optional<std::int64_t> t_pad, t_move, t_query;
    std::optional<int> sessions;
    std::optional<double> alpha, eps, r;
    std::optional<int> retained_cap;
    std::optional<double> f_ll;
};

/// Phase budget and learned-accuracy parameters for one episode.
struct PhaseSchedule {
    int n = 0, k = 0;
    std::int64_t T = 0;
    std::string family;
    int degree = 1;
    double c = 0.0;       ///< entropy threshold (nats)
    double lambda = 0.0;  ///< dispersion floor of the true model class

    std::int64_t t_pad = 0, t_move = 0, t_query = 0;
    int sessions = 0;  ///< S: one (move, query, move-back) block per plan point
    std::int64_t t_0 = 0;

    double alpha = 0.0;  ///< learning query-ball radius
    double r = 0.0;      ///< interior radius = eird_ball_radius(n, k)
    double eps = 0.0;    ///< action-perturbation budget = r / T^{1/4}
    double delta_pad = 0.0, delta_move = 0.0, delta_query = 0.0;  ///< = T^{-1/4}
    double beta = 0.0;   ///< implied per-query noise bound at this t_query
    double f_ll = 0.0, f_q = 0.0;
    int retained_cap = 512;  ///< max retained IRD components (entropy set pinned)

    void validate() const;
};

/// Instantiates the phase formulas at desk scale: every constant can be
/// overridden; defaults are chosen so t_0 < T/2 for T >= ~3e4 (smaller
/// horizons need explicit budget overrides).
PhaseSchedule compute_schedule(int n, int k, std::int64_t T, const std::string& family,
                               int degree, double c, double lambda,
                               const ScheduleOverrides& overrides = {});

struct RoundRecord {
    std::int64_t t = 0;
    char phase = '?';  // p(ad) / m(ove) / q(uery) / b(ack) / o(ptimize)
    std::vector<int> menu;
    int chosen = -1;
    double reward = 0.0;
    double loss = 0.0;
    std::uint64_t memory_digest = 0;
    std::int64_t decision_set_size = 0;
    double entropy_v = 0.0;
};

struct RegretReport {
    double cumulative_reward = 0.0;
    double benchmark = 0.0;
    bool benchmark_available = false;
    double regret = 0.0;  ///< benchmark - cumulative_reward
    double final_entropy = 0.0;
    double entropy_margin = 0.0;  ///< final_entropy - c
    std::int64_t optimize_rounds = 0;
    std::int64_t xi_over_budget = 0;  ///< optimize rounds with ||xi|| > eps
    double epsilon_hat = 0.0;
    std::int64_t components_dropped = 0;
};

struct EpisodeResult {
    RegretReport report;
    std::vector<RoundRecord> trace;
    Hypothesis hypothesis;
    SimplexVector final_memory;
};

/// Full episode: pad, S x (move, query, move-back), fit, optimize. If
/// `benchmark_point` is set, the report's benchmark is the total reward of
/// that fixed item distribution over all T rounds.
EpisodeResult run_episode(const PreferenceModel& truth, const RewardFn& rewards,
                          const PhaseSchedule& schedule, std::uint64_t seed,
                          const std::optional<SimplexVector>& benchmark_point = std::nullopt);

}  // namespace menurec
