#pragma once

#include <functional>
#include <vector>

#include "menurec/core_types.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

/// Integer target histogram for the MoveTo steering policy.
struct SteeringTarget {
    std::vector<std::int64_t> counts;  ///< V_i, summing to t_star
    std::int64_t t_star = 0;

    /// Rounds x * t_star to integers summing exactly to t_star (largest
    /// fractional parts get the remainder).
    static SteeringTarget from_distribution(const SimplexVector& x, std::int64_t t_star);
};

/// The k items with the smallest current counts, ties broken uniformly.
Menu uniform_pad_menu(const Histogram& current, int k, Rng& rng);

/// The k items with the largest remaining deficits, ties broken uniformly.
/// The caller decrements the selected item's deficit after each round.
/// All-zero deficits fall back to uniform_pad_menu.
Menu move_to_menu(const std::vector<std::int64_t>& deficits, const Histogram& current, int k,
                  Rng& rng);

/// Covering menus for score queries: item 0 appears in every menu, the other
/// items are packed (k-1 at a time) into ceil((n-1)/(k-1)) menus, the last
/// padded with already-covered non-zero items.
std::vector<Menu> covering_menus(int n, int k);

struct QueryResult {
    SimplexVector estimate;        ///< normalized score estimate, sums to 1
    std::int64_t rounds_used = 0;
    double drift_bound = 0.0;      ///< t_query / (t_elapsed + t_query)
    bool retry = false;            ///< a reference-item frequency came up empty
};

/// Plays t_query rounds of covering menus against the live model, updating
/// `history` in place; within-menu frequencies are rescaled relative to item
/// 0 and normalized. `on_round` (optional) observes every (menu, choice).
QueryResult run_query(const PreferenceModel& m_true, Histogram& history, int k,
                      std::int64_t t_query, Rng& rng,
                      const std::function<void(const Menu&, int)>& on_round = {});

/// Closed-form variant: replaces sampling with the exact per-menu selection
/// probabilities at the fixed memory vector x. Returns M(x)/M*_x exactly.
QueryResult run_query_exact(const PreferenceModel& m, const SimplexVector& x);

}  // namespace menurec
