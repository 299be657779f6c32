#pragma once

#include <optional>
#include <string>
#include <vector>

#include "menurec/core_types.hpp"
#include "menurec/orchestrator.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

/// Declarative reward stream. `to_fn` compiles it into the per-round closure
/// run_episode consumes; all produced values lie in [0,1].
struct RewardStream {
    std::string kind = "constant";  // constant | two-phase | table | adaptive

    double value = 0.5;  // constant

    // two-phase: items_phase1 earn `alpha` for t <= t_star, items_phase2 earn
    // `beta` afterwards; everything else earns 0.
    double alpha = 0.0;
    double beta = 0.0;
    std::int64_t t_star = 0;
    std::vector<int> items_phase1{0};
    std::vector<int> items_phase2{1};

    // table: rewards[t-1][i] for t in [1, rows]; rounds past the table repeat
    // the last row.
    std::vector<std::vector<double>> table;

    // adaptive (stub): deterministic rotating target, reward 1 for item
    // floor((t-1)/period) mod n; a stand-in for a reactive adversary.
    std::int64_t period = 1000;

    void validate(int n) const;
    RewardFn to_fn(int n) const;
};

/// One fully-specified episode: model, game dimensions, rewards, seed.
struct ScenarioConfig {
    std::string name = "episode";
    std::string model_file;              // path; empty when model_json is set
    std::string model_json;              // inline model document
    int n = 0;
    int k = 2;
    std::int64_t T = 0;
    double c = 0.0;
    std::string family = "bup";          // learner family
    int degree = 1;
    double lambda = 0.0;                 // dispersion floor assumed by the learner
    RewardStream rewards;
    std::uint64_t seed = 0;
    ScheduleOverrides overrides;
    std::string output_dir = ".";

    ModelPtr load_model() const;
};

/// Parse / serialize round-trip is identity; unknown fields are rejected.
ScenarioConfig parse_scenario_config(const std::string& text);
std::string serialize_scenario_config(const ScenarioConfig& cfg);
ScenarioConfig load_scenario_config(const std::string& path);

// ---------------------------------------------------------------------------
// Brute-force benchmark oracle.

struct OracleResult {
    SimplexVector best_point;
    double objective = 0.0;       ///< total reward of the best feasible point
    double mesh_step = 0.0;
    double entropy_margin = 0.0;  ///< H(best) - c
    double max_ird_residual = 0.0;
    std::int64_t points_scanned = 0;
    std::int64_t points_feasible = 0;
};

/// Exhaustive mesh over Delta(n) (n <= 6), filtered by H >= c and probe-based
/// EIRD membership, maximizing the total reward sum_t <rho_t, x>. Candidates
/// are tried best-first so only near-optimal points pay for membership tests.
OracleResult oracle_best_point(const PreferenceModel& model, double c, const RewardFn& rewards,
                               std::int64_t T, double mesh_step,
                               const std::vector<SimplexVector>& probes,
                               double membership_tol = 1e-7);

// ---------------------------------------------------------------------------
// Linear-regret constructions.

/// Fixed policies the constructions defeat. The theorems quantify over all
/// algorithms; the harness demonstrates linear regret for these natural ones.
enum class LowerBoundStrategy { kGreedyMyopic, kBestFixedMenuDistribution, kOracleIrdChaser };

LowerBoundStrategy parse_strategy(const std::string& name);
std::string strategy_name(LowerBoundStrategy s);

struct LowerBoundResult {
    int which = 0;
    LowerBoundStrategy strategy = LowerBoundStrategy::kGreedyMyopic;
    std::int64_t T = 0;
    std::int64_t t_star = 0;
    double reward = 0.0;     ///< strategy total, original reward units
    double benchmark = 0.0;  ///< forbidden benchmark total, original units
    double regret = 0.0;     ///< benchmark - reward
    // Affine map raw -> [0,1] used for trace emission: scaled = (raw-lo)/(hi-lo).
    double reward_lo = 0.0;
    double reward_hi = 1.0;
    std::vector<double> regret_curve;  ///< regret after each round (sampled every `stride`)
    std::int64_t curve_stride = 1;
};

/// Simulates construction `which` (1: rising-item model vs the IRD-of-uniform
/// item benchmark; 2: the (a,b,c) commitment model vs the best fixed menu
/// distribution). Construction 2's raw rewards include -beta; totals and
/// regret are reported in raw units with the affine [0,1] map recorded.
LowerBoundResult run_lower_bound_scenario(int which, std::int64_t T, LowerBoundStrategy strategy,
                                          Rng& rng);

/// Random well-dispersed instance of a learnable family; demo/benchmark
/// truths. degree is the polynomial degree (or sparsity for sfr).
ModelPtr random_model(const std::string& family, int n, int degree, double lambda, Rng& rng);

// ---------------------------------------------------------------------------
// Persistence: JSONL traces, JSON reports, CSV curves.

inline constexpr int kTraceSchemaVersion = 1;

/// First line is a header record carrying the schema version and episode
/// metadata; each later line is one RoundRecord.
void write_trace_jsonl(const std::string& path, const std::vector<RoundRecord>& trace,
                       const ScenarioConfig& cfg);
std::vector<RoundRecord> read_trace_jsonl(const std::string& path);

void write_report_json(const std::string& path, const RegretReport& report,
                       const ScenarioConfig& cfg);

/// CSV with one row per round (plus header): t, phase, chosen, reward,
/// cum_reward, loss, entropy, decision_set_size.
void trace_to_csv(const std::vector<RoundRecord>& trace, const std::string& path);

}  // namespace menurec
