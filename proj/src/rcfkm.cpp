#include "menurec/rcfkm.hpp"

#include <cmath>
#include <stdexcept>

namespace menurec {

void FkmConfig::validate() const {
    if (dim < 1) throw std::invalid_argument("FkmConfig: dim must be >= 1");
    if (eta <= 0.0) throw std::invalid_argument("FkmConfig: eta must be positive");
    if (delta < 0.0 || eps < 0.0) throw std::invalid_argument("FkmConfig: negative radius");
    if (r <= delta + eps)
        throw std::invalid_argument("FkmConfig: need r > delta + eps for shrinkage");
    if (batch < 1) throw std::invalid_argument("FkmConfig: batch must be >= 1");
}

FkmSchedule default_schedule(std::int64_t T, double D, int chart_dim, double r) {
    if (T < 16) throw std::invalid_argument("default_schedule: need T >= 16");
    if (chart_dim < 1 || D <= 0.0 || r <= 0.0)
        throw std::invalid_argument("default_schedule: bad parameters");
    double t34 = std::pow(static_cast<double>(T), 0.75);
    double t14 = std::pow(static_cast<double>(T), 0.25);
    double delta = std::min(1.0 / t14, 0.9 * r / t14);
    return FkmSchedule{D / (chart_dim * t34), delta};
}

Vector sphere_sample(int dim, Rng& rng) {
    Vector u(dim);
    double nrm = 0.0;
    do {
        for (int i = 0; i < dim; ++i) u[i] = rng.normal();
        nrm = u.norm();
    } while (nrm < 1e-12);
    return u / nrm;
}

Vector contracting_ogd_step(const Vector& x, const Vector& gradient, const DecisionSet& next_set,
                            double eta) {
    Vector y = x - eta * gradient;
    DecisionSet plain = next_set;
    plain.set_shrink(1.0);
    ProjectionReport rep = project_onto_decision_set(y, plain, 1e-9, 5000);
    if (!rep.converged && rep.max_violation > 1e-6)
        throw std::runtime_error("contracting_ogd_step: projection did not converge");
    return rep.point;
}

FkmOptimizer::FkmOptimizer(FkmConfig config) : config_(config) {
    config_.validate();
    x_ = Vector::Zero(config_.dim);
    u_ = Vector::Zero(config_.dim);
}

Vector FkmOptimizer::propose_action(Rng& rng) {
    if (pending_ == 0) u_ = sphere_sample(config_.dim, rng);
    return x_ + config_.delta * u_;
}

void FkmOptimizer::observe_loss(double phi, const DecisionSet& next_set) {
    if (phi < -1e-12 || phi > 1.0 + 1e-12)
        throw std::invalid_argument("FkmOptimizer: loss must lie in [0,1]");
    phi_acc_ += phi;
    if (++pending_ < config_.batch) {
        ++t_;
        return;
    }
    double phi_bar = phi_acc_ / static_cast<double>(pending_);
    pending_ = 0;
    phi_acc_ = 0.0;
    Vector y = x_;
    if (config_.delta > 0.0) {
        double centered = phi_bar;
        if (config_.baseline) {
            // Baseline uses only past losses, so it is independent of u_.
            centered -= phi_mean_;
            phi_mean_ += (phi_bar - phi_mean_) / static_cast<double>(++observed_);
        }
        Vector g = (config_.dim / config_.delta) * centered * u_;
        y -= config_.eta * g;
    }
    DecisionSet shrunk = next_set;
    shrunk.set_shrink(config_.shrink());
    ProjectionReport rep = project_onto_decision_set(y, shrunk, 1e-8, 5000);
    if (!rep.converged && rep.max_violation > 1e-6)
        throw std::runtime_error("FkmOptimizer: projection did not converge");
    x_ = rep.point;
    ++t_;
}

}  // namespace menurec
