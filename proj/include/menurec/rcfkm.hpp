#pragma once

#include <cstdint>

#include "menurec/geometry.hpp"

namespace menurec {

/// Parameters of the bandit optimizer over contracting chart-space sets.
struct FkmConfig {
    std::int64_t horizon = 0;  ///< T*
    int dim = 0;               ///< chart dimension (n - 1)
    double eta = 0.0;          ///< step size
    double delta = 0.0;        ///< exploration radius (0 allowed: no exploration)
    double eps = 0.0;          ///< adversarial action-perturbation budget
    double r = 0.0;            ///< interior-ball radius of every decision set
    double D = 2.0;            ///< diameter bound
    double G = 1.0;            ///< loss Lipschitz bound
    /// Center the one-point estimate on the running loss mean. E[u] = 0, so
    /// the gradient estimate stays unbiased while its variance drops by the
    /// squared mean loss.
    bool baseline = false;
    /// Rounds per gradient update: the sphere direction is held fixed and the
    /// observed losses averaged, shrinking sampling noise by 1/batch without
    /// biasing the estimate. 1 recovers the plain one-point scheme.
    int batch = 1;

    void validate() const;
    /// sigma = r/(r - delta - eps) applied to every projection target set.
    double shrink() const { return r / (r - delta - eps); }
};

struct FkmSchedule {
    double eta;
    double delta;
};

/// eta = D/(chart_dim * T^{3/4}); delta = min(T^{-1/4}, 0.9 r T^{-1/4}).
FkmSchedule default_schedule(std::int64_t T, double D, int chart_dim, double r);

/// One step of the full-information variant: project x - eta*gradient onto
/// next_set (no shrinkage, no sphere sampling).
Vector contracting_ogd_step(const Vector& x, const Vector& gradient, const DecisionSet& next_set,
                            double eta);

/// Bandit optimizer: propose y_t = x_t + delta*u_t, receive the realized loss
/// phi_t, update x via a one-point gradient estimate projected onto the
/// shrunken next decision set.
class FkmOptimizer {
  public:
    explicit FkmOptimizer(FkmConfig config);

    const FkmConfig& config() const { return config_; }
    std::int64_t round() const { return t_; }
    const Vector& center() const { return x_; }
    const Vector& last_direction() const { return u_; }

    /// y_t = x_t + delta * u_t with u_t fresh-sampled uniform on the sphere.
    Vector propose_action(Rng& rng);

    /// g_t = (dim/delta) * phi * u_t; x_{t+1} = proj onto shrunken next_set.
    /// Requires phi in [0,1]. Throws if the projection fails to converge.
    void observe_loss(double phi, const DecisionSet& next_set);

  private:
    FkmConfig config_;
    std::int64_t t_ = 1;
    Vector x_;
    Vector u_;
    double phi_mean_ = 0.0;
    std::int64_t observed_ = 0;
    double phi_acc_ = 0.0;
    int pending_ = 0;
};

/// Uniform sample from the unit sphere in `dim` dimensions.
Vector sphere_sample(int dim, Rng& rng);

}  // namespace menurec
