#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "menurec/rng.hpp"

namespace menurec {

using Vector = Eigen::VectorXd;

constexpr double kSimplexTol = 1e-12;

/// A point of the probability simplex Delta(n). Immutable after construction;
/// nonnegativity and unit sum are checked (within 1e-12) on every entry path.
class SimplexVector {
  public:
    explicit SimplexVector(Vector coords);

    static SimplexVector uniform(int n);
    static SimplexVector point_mass(int n, int item);
    /// Normalizes an arbitrary nonnegative vector; throws if the mass is zero.
    static SimplexVector normalized(const Vector& raw);
    static SimplexVector random(int n, Rng& rng);

    int dim() const { return static_cast<int>(coords_.size()); }
    double operator[](int i) const { return coords_[i]; }
    const Vector& coords() const { return coords_; }

  private:
    Vector coords_;
};

/// Entropy in nats; 0*log(0) treated as 0.
double entropy(const SimplexVector& v);

/// Total variation distance (1/2) * sum |a_i - b_i|.
double tv_distance(const SimplexVector& a, const SimplexVector& b);

/// Unnormalized selection history. Integer counts so that repeated memory
/// updates are exact; normalize() is the agent's memory vector.
class Histogram {
  public:
    explicit Histogram(int n) : counts_(n, 0), total_(0) {}

    int dim() const { return static_cast<int>(counts_.size()); }
    std::int64_t count(int i) const { return counts_.at(i); }
    std::int64_t total() const { return total_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

    void record(int chosen);
    SimplexVector normalize() const;

  private:
    std::vector<std::int64_t> counts_;
    std::int64_t total_;
};

/// Returns a copy of h with one more selection of `chosen`. The normalized
/// result equals e_i/(t+1) + t*v_t/(t+1) exactly.
Histogram update_memory(const Histogram& h, int chosen);

/// A k-subset of [0, n); items stored sorted.
class Menu {
  public:
    Menu(std::vector<int> items, int n);

    int size() const { return static_cast<int>(items_.size()); }
    int n() const { return n_; }
    const std::vector<int>& items() const { return items_; }
    bool contains(int item) const;

    bool operator==(const Menu& other) const { return items_ == other.items_; }

  private:
    std::vector<int> items_;
    int n_;
};

/// All C(n,k) menus in lexicographic order, with an index lookup.
class MenuCatalog {
  public:
    static constexpr std::int64_t kDefaultCap = 200000;

    MenuCatalog(int n, int k, std::int64_t cap = kDefaultCap);

    int n() const { return n_; }
    int k() const { return k_; }
    std::int64_t size() const { return static_cast<std::int64_t>(menus_.size()); }
    const Menu& menu(std::int64_t j) const { return menus_[j]; }
    const std::vector<Menu>& menus() const { return menus_; }
    std::int64_t index(const Menu& m) const;

  private:
    int n_;
    int k_;
    std::vector<Menu> menus_;
};

std::int64_t binomial(int n, int k);

/// Probability vector over a MenuCatalog's menus.
class MenuDistribution {
  public:
    MenuDistribution(Vector weights, const MenuCatalog& catalog);

    const Vector& weights() const { return weights_; }
    const MenuCatalog& catalog() const { return *catalog_; }
    std::int64_t sample(Rng& rng) const;

  private:
    Vector weights_;
    const MenuCatalog* catalog_;
};

}  // namespace menurec
