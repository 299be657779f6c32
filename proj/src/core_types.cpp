#include "menurec/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace menurec {

SimplexVector::SimplexVector(Vector coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw std::invalid_argument("SimplexVector: need n >= 2");
    if (coords_.minCoeff() < -kSimplexTol)
        throw std::invalid_argument("SimplexVector: negative coordinate");
    if (std::abs(coords_.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("SimplexVector: coordinates must sum to 1");
    // Clamp roundoff so downstream arithmetic sees a clean point.
    for (Eigen::Index i = 0; i < coords_.size(); ++i)
        if (coords_[i] < 0.0) coords_[i] = 0.0;
    coords_ /= coords_.sum();
}

SimplexVector SimplexVector::uniform(int n) {
    return SimplexVector(Vector::Constant(n, 1.0 / n));
}

SimplexVector SimplexVector::point_mass(int n, int item) {
    Vector v = Vector::Zero(n);
    v[item] = 1.0;
    return SimplexVector(std::move(v));
}

SimplexVector SimplexVector::normalized(const Vector& raw) {
    double s = raw.sum();
    if (s <= 0.0) throw std::invalid_argument("SimplexVector::normalized: zero mass");
    return SimplexVector(raw / s);
}

SimplexVector SimplexVector::random(int n, Rng& rng) {
    // Exponential spacings give a uniform Dirichlet(1,...,1) sample.
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
    return SimplexVector(v / v.sum());
}

double entropy(const SimplexVector& v) {
    double h = 0.0;
    for (int i = 0; i < v.dim(); ++i) {
        double p = v[i];
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

double tv_distance(const SimplexVector& a, const SimplexVector& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("tv_distance: dimension mismatch");
    return 0.5 * (a.coords() - b.coords()).lpNorm<1>();
}

void Histogram::record(int chosen) {
    counts_.at(chosen) += 1;
    total_ += 1;
}

SimplexVector Histogram::normalize() const {
    if (total_ == 0) throw std::logic_error("Histogram::normalize: empty history");
    Vector v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = static_cast<double>(counts_[i]) / total_;
    return SimplexVector(std::move(v));
}

Histogram update_memory(const Histogram& h, int chosen) {
    if (chosen < 0 || chosen >= h.dim())
        throw std::out_of_range("update_memory: item index out of range");
    Histogram out = h;
    out.record(chosen);
    return out;
}

Menu::Menu(std::vector<int> items, int n) : items_(std::move(items)), n_(n) {
    std::sort(items_.begin(), items_.end());
    if (std::adjacent_find(items_.begin(), items_.end()) != items_.end())
        throw std::invalid_argument("Menu: duplicate items");
    if (items_.size() < 2) throw std::invalid_argument("Menu: need k >= 2");
    if (items_.front() < 0 || items_.back() >= n)
        throw std::invalid_argument("Menu: item index out of range");
}

bool Menu::contains(int item) const {
    return std::binary_search(items_.begin(), items_.end(), item);
}

std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

MenuCatalog::MenuCatalog(int n, int k, std::int64_t cap) : n_(n), k_(k) {
    if (k < 2 || k > n) throw std::invalid_argument("MenuCatalog: need 2 <= k <= n");
    std::int64_t count = binomial(n, k);
    if (count > cap) throw std::runtime_error("MenuCatalog: menu space too large");
    menus_.reserve(count);
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        menus_.emplace_back(idx, n);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::int64_t MenuCatalog::index(const Menu& m) const {
    // Lexicographic rank of the sorted k-subset.
    std::int64_t rank = 0;
    int prev = -1;
    for (int pos = 0; pos < k_; ++pos) {
        int item = m.items()[pos];
        for (int c = prev + 1; c < item; ++c) rank += binomial(n_ - c - 1, k_ - pos - 1);
        prev = item;
    }
    return rank;
}

MenuDistribution::MenuDistribution(Vector weights, const MenuCatalog& catalog)
    : weights_(std::move(weights)), catalog_(&catalog) {
    if (weights_.size() != catalog.size())
        throw std::invalid_argument("MenuDistribution: weight count != catalog size");
    if (weights_.minCoeff() < -kSimplexTol || std::abs(weights_.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("MenuDistribution: weights must form a distribution");
    for (Eigen::Index j = 0; j < weights_.size(); ++j)
        if (weights_[j] < 0.0) weights_[j] = 0.0;
    weights_ /= weights_.sum();
}

std::int64_t MenuDistribution::sample(Rng& rng) const {
    double u = rng.uniform();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < weights_.size(); ++j) {
        acc += weights_[j];
        if (u <= acc) return j;
    }
    return weights_.size() - 1;
}

}  // namespace menurec
