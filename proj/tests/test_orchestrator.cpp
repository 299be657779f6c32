#include <doctest.h>

#include <cmath>
#include <map>

#include "menurec/orchestrator.hpp"
#include "menurec/scenarios.hpp"

using namespace menurec;

TEST_CASE("reward to loss flips and validates") {
    CHECK(reward_to_loss(0.0) == doctest::Approx(1.0));
    CHECK(reward_to_loss(1.0) == doctest::Approx(0.0));
    CHECK(reward_to_loss(0.3) == doctest::Approx(0.7));
    CHECK_THROWS(reward_to_loss(-0.1));
    CHECK_THROWS(reward_to_loss(1.2));
}

TEST_CASE("schedule accounting and caps hold") {
    PhaseSchedule s = compute_schedule(5, 2, 200000, "bup", 1, 0.8 * std::log(5.0), 0.8);
    CHECK(s.t_0 == s.t_pad + s.sessions * (2 * s.t_move + s.t_query));
    CHECK(s.t_0 < s.T / 2);
    CHECK(s.r == doctest::Approx(0.05));
    CHECK(s.eps == doctest::Approx(s.r / std::pow(200000.0, 0.25)));
    double r_move = static_cast<double>(s.t_move) / static_cast<double>(s.t_0);
    CHECK(s.alpha <= (2 - 1) / (2.0 * 5 * 4) * r_move + 1e-12);
    CHECK_NOTHROW(s.validate());

    // Budgets scale like T^{3/4}: quadrupling T roughly triples t_0, well
    // below the 4x of linear scaling.
    PhaseSchedule s4 = compute_schedule(5, 2, 800000, "bup", 1, 0.8 * std::log(5.0), 0.8);
    double growth = static_cast<double>(s4.t_0) / static_cast<double>(s.t_0);
    CHECK(growth < 3.2);
    CHECK(growth > 2.4);
}

TEST_CASE("schedule overrides are honored and validated") {
    ScheduleOverrides ov;
    ov.t_pad = 1000;
    ov.t_move = 600;
    ov.t_query = 300;
    ov.retained_cap = 8;
    PhaseSchedule s = compute_schedule(5, 2, 20000, "bup", 1, 1.2, 0.8, ov);
    CHECK(s.t_pad == 1000);
    CHECK(s.t_move == 600);
    CHECK(s.t_query == 300);
    CHECK(s.retained_cap == 8);

    // Horizon too small for the default budgets.
    CHECK_THROWS(compute_schedule(5, 2, 20000, "bup", 1, 1.2, 0.8));
    CHECK_THROWS(compute_schedule(5, 2, 500, "bup", 1, 1.2, 0.8));

    // Alpha above the steering-reach cap is rejected.
    ScheduleOverrides bad = ov;
    bad.alpha = 0.5;
    CHECK_THROWS(compute_schedule(5, 2, 20000, "bup", 1, 1.2, 0.8, bad));
}

namespace {

EpisodeResult small_episode(std::uint64_t seed) {
    BupModel truth({{0.88, 0.04}, {0.9, -0.04}, {0.86, 0.03}, {0.91, -0.02}, {0.89, 0.02}},
                   0.8);
    ScheduleOverrides ov;
    ov.t_pad = 500;
    ov.t_move = 300;
    ov.t_query = 200;
    ov.retained_cap = 8;
    PhaseSchedule sched =
        compute_schedule(5, 2, 10000, "bup", 1, 0.8 * std::log(5.0), 0.8, ov);
    RewardFn rewards = [](std::int64_t, int item) { return item == 0 ? 0.9 : 0.0; };
    return run_episode(truth, rewards, sched, seed, SimplexVector::uniform(5));
}

}  // namespace

TEST_CASE("episode trace covers every round with the declared phases") {
    EpisodeResult res = small_episode(7);
    CHECK(res.trace.size() == 10000);
    std::map<char, std::int64_t> counts;
    for (const RoundRecord& r : res.trace) {
        counts[r.phase] += 1;
        CHECK(r.reward >= 0.0);
        CHECK(r.loss == doctest::Approx(1.0 - r.reward));
        CHECK(static_cast<int>(r.menu.size()) == 2);
    }
    CHECK(counts['p'] == 500);
    CHECK(counts['q'] == 4 * 200);
    CHECK(counts['m'] + counts['b'] == 4 * 2 * 300);
    CHECK(counts['o'] == 10000 - 500 - 4 * (2 * 300 + 200));

    // Round indices are 1..T in order.
    CHECK(res.trace.front().t == 1);
    CHECK(res.trace.back().t == 10000);

    // Report totals agree with the trace.
    double sum = 0.0;
    for (const RoundRecord& r : res.trace) sum += r.reward;
    CHECK(res.report.cumulative_reward == doctest::Approx(sum));
    CHECK(res.report.benchmark == doctest::Approx(0.9 * 0.2 * 10000.0).epsilon(1e-9));
    CHECK(res.report.regret == doctest::Approx(res.report.benchmark - sum));
    CHECK(res.report.final_entropy == doctest::Approx(entropy(res.final_memory)));
}

TEST_CASE("episodes replay deterministically") {
    EpisodeResult a = small_episode(123);
    EpisodeResult b = small_episode(123);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].chosen == b.trace[i].chosen);
        CHECK(a.trace[i].menu == b.trace[i].menu);
        CHECK(a.trace[i].memory_digest == b.trace[i].memory_digest);
    }
    CHECK(a.report.cumulative_reward == doctest::Approx(b.report.cumulative_reward));

    EpisodeResult c = small_episode(124);
    bool differs = false;
    for (std::size_t i = 0; i < a.trace.size() && !differs; ++i)
        differs = a.trace[i].chosen != c.trace[i].chosen;
    CHECK(differs);
}

TEST_CASE("episode keeps memory entropy near the constraint") {
    EpisodeResult res = small_episode(9);
    CHECK(res.report.final_entropy >= 0.8 * std::log(5.0) - 0.05);
    CHECK(res.report.entropy_margin == doctest::Approx(res.report.final_entropy -
                                                       0.8 * std::log(5.0)));
}
