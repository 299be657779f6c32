#include "menurec/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace menurec {

SteeringTarget SteeringTarget::from_distribution(const SimplexVector& x, std::int64_t t_star) {
    const int n = x.dim();
    SteeringTarget out;
    out.t_star = t_star;
    out.counts.resize(n);
    std::vector<std::pair<double, int>> frac(n);
    std::int64_t assigned = 0;
    for (int i = 0; i < n; ++i) {
        double exact = x[i] * static_cast<double>(t_star);
        out.counts[i] = static_cast<std::int64_t>(std::floor(exact));
        assigned += out.counts[i];
        frac[i] = {exact - std::floor(exact), i};
    }
    std::sort(frac.begin(), frac.end(), std::greater<>());
    for (std::int64_t r = 0; r < t_star - assigned; ++r) ++out.counts[frac[r % n].second];
    return out;
}

namespace {

/// k items minimizing `key` with uniform tie-breaking.
template <typename KeyFn>
Menu pick_k_by(int n, int k, Rng& rng, KeyFn key) {
    std::vector<std::tuple<double, double, int>> order(n);
    for (int i = 0; i < n; ++i) order[i] = {key(i), rng.uniform(), i};
    std::partial_sort(order.begin(), order.begin() + k, order.end());
    std::vector<int> items(k);
    for (int j = 0; j < k; ++j) items[j] = std::get<2>(order[j]);
    return Menu(std::move(items), n);
}

}  // namespace

Menu uniform_pad_menu(const Histogram& current, int k, Rng& rng) {
    return pick_k_by(current.dim(), k, rng,
                     [&](int i) { return static_cast<double>(current.count(i)); });
}

Menu move_to_menu(const std::vector<std::int64_t>& deficits, const Histogram& current, int k,
                  Rng& rng) {
    if (static_cast<int>(deficits.size()) != current.dim())
        throw std::invalid_argument("move_to_menu: deficit size mismatch");
    bool all_zero = std::all_of(deficits.begin(), deficits.end(),
                                [](std::int64_t d) { return d <= 0; });
    if (all_zero) return uniform_pad_menu(current, k, rng);
    return pick_k_by(current.dim(), k, rng,
                     [&](int i) { return -static_cast<double>(deficits[i]); });
}

std::vector<Menu> covering_menus(int n, int k) {
    std::vector<Menu> menus;
    int per = k - 1;
    int groups = (n - 1 + per - 1) / per;
    int next = 1;
    for (int g = 0; g < groups; ++g) {
        std::vector<int> items{0};
        while (static_cast<int>(items.size()) < k && next < n) items.push_back(next++);
        // Pad the last menu with already-covered non-zero items.
        int pad = 1;
        while (static_cast<int>(items.size()) < k) items.push_back(pad++);
        menus.emplace_back(std::move(items), n);
    }
    return menus;
}

QueryResult run_query(const PreferenceModel& m_true, Histogram& history, int k,
                      std::int64_t t_query, Rng& rng,
                      const std::function<void(const Menu&, int)>& on_round) {
    const int n = m_true.dim();
    if (history.dim() != n) throw std::invalid_argument("run_query: dimension mismatch");
    if (t_query < 1) throw std::invalid_argument("run_query: need t_query >= 1");

    std::vector<Menu> menus = covering_menus(n, k);
    const auto m_count = static_cast<std::int64_t>(menus.size());
    std::int64_t base = t_query / m_count;
    std::int64_t rem = t_query % m_count;
    if (base == 0) throw std::invalid_argument("run_query: t_query smaller than menu count");

    const std::int64_t t_elapsed = history.total();
    std::vector<std::vector<std::int64_t>> tallies(menus.size(),
                                                   std::vector<std::int64_t>(n, 0));
    std::vector<std::int64_t> rounds_per(menus.size(), base);
    rounds_per[0] += rem;

    for (std::size_t j = 0; j < menus.size(); ++j) {
        for (std::int64_t r = 0; r < rounds_per[j]; ++r) {
            SimplexVector v = history.total() > 0 ? history.normalize()
                                                  : SimplexVector::uniform(n);
            int choice = sample_choice(m_true, v, menus[j], rng);
            history.record(choice);
            ++tallies[j][choice];
            if (on_round) on_round(menus[j], choice);
        }
    }

    // ratio_i = frequency of i relative to item 0, taken from the first menu
    // containing i; zero reference observations flag a retry with smoothing.
    bool retry = false;
    Vector ratios = Vector::Zero(n);
    ratios[0] = 1.0;
    std::vector<bool> seen(n, false);
    seen[0] = true;
    for (std::size_t j = 0; j < menus.size(); ++j) {
        double f0 = static_cast<double>(tallies[j][0]) / rounds_per[j];
        if (f0 <= 0.0) {
            retry = true;
            f0 = 0.5 / static_cast<double>(rounds_per[j]);
        }
        for (int item : menus[j].items()) {
            if (seen[item]) continue;
            seen[item] = true;
            double fi = static_cast<double>(tallies[j][item]) / rounds_per[j];
            ratios[item] = fi / f0;
        }
    }
    double drift = static_cast<double>(t_query) / static_cast<double>(t_elapsed + t_query);
    return QueryResult{SimplexVector::normalized(ratios), t_query, drift, retry};
}

QueryResult run_query_exact(const PreferenceModel& m, const SimplexVector& x) {
    ScoreVector s = m.evaluate(x);
    QueryResult out{SimplexVector::normalized(s.scores), 0, 0.0, false};
    return out;
}

}  // namespace menurec
