#include "menurec/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

namespace menurec {

Vector to_chart(const SimplexVector& v) {
    const int n = v.dim();
    return v.coords().head(n - 1).array() - 1.0 / n;
}

SimplexVector from_chart(const Vector& x) {
    const int n = static_cast<int>(x.size()) + 1;
    Vector v(n);
    v.head(n - 1) = x.array() + 1.0 / n;
    v[n - 1] = 1.0 - v.head(n - 1).sum();
    if (v.minCoeff() < -1e-9) throw std::invalid_argument("from_chart: point outside the simplex");
    v = v.cwiseMax(0.0);
    return SimplexVector::normalized(v);
}

bool chart_in_simplex(const Vector& x, double tol) {
    const int n = static_cast<int>(x.size()) + 1;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double vi = x[i] + 1.0 / n;
        if (vi < -tol) return false;
        sum += vi;
    }
    return sum <= 1.0 + tol;
}

Vector project_capped_nonneg(const Vector& t, double cap) {
    Vector u = t.cwiseMax(0.0);
    if (u.sum() <= cap) return u;
    // Oversubscribed: the cap is tight; shift by the threshold tau with
    // sum_i max(t_i - tau, 0) = cap.
    std::vector<double> sorted(t.data(), t.data() + t.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double acc = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        acc += sorted[j];
        double cand = (acc - cap) / static_cast<double>(j + 1);
        if (j + 1 == sorted.size() || cand >= sorted[j + 1]) {
            tau = cand;
            break;
        }
    }
    return (t.array() - tau).cwiseMax(0.0);
}

// ---------------------------------------------------------------------------
// Wolfe min-norm point.

namespace {

// Affine minimizer of ||B w|| subject to 1^T w = 1 (w unrestricted in sign),
// via the KKT system [B^T B, 1; 1^T, 0] [w; mu] = [0; 1].
Eigen::VectorXd affine_min_norm(const Eigen::MatrixXd& B) {
    const Eigen::Index s = B.cols();
    Eigen::MatrixXd K(s + 1, s + 1);
    K.topLeftCorner(s, s) = B.transpose() * B;
    K.topRightCorner(s, 1).setOnes();
    K.bottomLeftCorner(1, s).setOnes();
    K(s, s) = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
    rhs[s] = 1.0;
    Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
    return sol.head(s);
}

}  // namespace

HullProjection project_onto_hull(const Vector& target, const Eigen::MatrixXd& vertices,
                                 double tol, int max_iter) {
    const Eigen::Index dim = vertices.rows();
    const Eigen::Index m = vertices.cols();
    if (m == 0) throw std::invalid_argument("project_onto_hull: empty vertex set");

    // Work on the shifted columns p_j = v_j - target; the answer is the
    // min-norm point of their hull.
    Eigen::MatrixXd P = vertices.colwise() - target;

    Eigen::Index j0 = 0;
    P.colwise().squaredNorm().minCoeff(&j0);
    std::vector<Eigen::Index> active{j0};
    Eigen::VectorXd w(1);
    w[0] = 1.0;

    Vector x = P.col(j0);
    bool converged = false;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        double xsq = x.squaredNorm();
        Eigen::Index jb = 0;
        double best = (P.transpose() * x).minCoeff(&jb);
        double gap = xsq - best;  // bounds ||x - x*||^2
        if (gap <= tol * tol + 1e-13 * std::max(1.0, xsq)) {
            converged = true;
            break;
        }
        if (std::find(active.begin(), active.end(), jb) != active.end()) {
            // Best improving vertex already active: numerically stalled.
            converged = gap <= 1e3 * tol * tol + 1e-10 * std::max(1.0, xsq);
            break;
        }
        active.push_back(jb);
        w.conservativeResize(active.size());
        w[w.size() - 1] = 0.0;

        // Minor cycle: pull the affine minimizer back into the relative
        // interior, dropping vertices that hit zero weight.
        while (true) {
            Eigen::MatrixXd B(dim, active.size());
            for (std::size_t s = 0; s < active.size(); ++s) B.col(s) = P.col(active[s]);
            Eigen::VectorXd v = affine_min_norm(B);
            if (!v.allFinite()) break;
            if (v.minCoeff() > 1e-12) {
                w = v;
                break;
            }
            double theta = 1.0;
            for (Eigen::Index s = 0; s < v.size(); ++s)
                if (v[s] <= 1e-12 && w[s] > v[s]) theta = std::min(theta, w[s] / (w[s] - v[s]));
            w = (1.0 - theta) * w + theta * v;
            std::vector<Eigen::Index> kept_idx;
            std::vector<double> kept_w;
            for (Eigen::Index s = 0; s < w.size(); ++s)
                if (w[s] > 1e-12) {
                    kept_idx.push_back(active[s]);
                    kept_w.push_back(w[s]);
                }
            if (kept_idx.empty()) {  // total collapse; keep the entering vertex
                kept_idx.push_back(active.back());
                kept_w.push_back(1.0);
            }
            active = std::move(kept_idx);
            w = Eigen::Map<Eigen::VectorXd>(kept_w.data(), kept_w.size());
        }
        w /= w.sum();
        x.setZero(dim);
        for (std::size_t s = 0; s < active.size(); ++s) x += w[s] * P.col(active[s]);
    }

    HullProjection out;
    out.weights = Vector::Zero(m);
    for (std::size_t s = 0; s < active.size(); ++s) out.weights[active[s]] = w[s];
    out.point = vertices * out.weights;
    out.distance = (out.point - target).norm();
    out.iterations = iter;
    out.converged = converged || iter < max_iter;
    return out;
}

double hull_distance(const Vector& target, const Eigen::MatrixXd& vertices, double tol) {
    return project_onto_hull(target, vertices, tol).distance;
}

// ---------------------------------------------------------------------------
// Entropy superlevel sets.

bool EntropySet::contains(const SimplexVector& v, double tol) const {
    return entropy(v) >= c - tol;
}

namespace {

// Inverse of phi(v) = v + mu*log(v) on (0, inf); safeguarded Newton.
double phi_inverse(double y, double mu) {
    double hi = std::max(1.0, y) + 1.0;            // phi(hi) >= hi > y
    double lo = std::min(1.0, std::exp((y - 1.0) / mu));  // phi(lo) <= y
    double v = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        double f = v + mu * std::log(v) - y;
        if (f > 0.0)
            hi = v;
        else
            lo = v;
        double step = f / (1.0 + mu / v);
        double vn = v - step;
        if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
        if (std::abs(vn - v) < 1e-15 * std::max(1.0, v)) return vn;
        v = vn;
    }
    return v;
}

// Full R^n metric: for fixed mu solve the simplex multiplier nu so that
// sum_i phi_inv(t_i + nu - mu) = 1, and return the resulting point.
Vector entropy_kkt_point(const Vector& t, double mu) {
    const Eigen::Index n = t.size();
    auto sum_at = [&](double nu, Vector* out) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double vi = phi_inverse(t[i] + nu - mu, mu);
            if (out) (*out)[i] = vi;
            s += vi;
        }
        return s;
    };
    double lo = -1.0, hi = 1.0;
    while (sum_at(lo, nullptr) > 1.0) lo = 2.0 * lo - 1.0;
    while (sum_at(hi, nullptr) < 1.0) hi = 2.0 * hi + 1.0;
    Vector v(n);
    for (int it = 0; it < 200; ++it) {
        double nu = 0.5 * (lo + hi);
        double s = sum_at(nu, &v);
        if (std::abs(s - 1.0) < 1e-13) break;
        if (s < 1.0)
            lo = nu;
        else
            hi = nu;
    }
    return v / v.sum();
}

// Chart metric: for fixed mu solve psi = mu*log(v_n) consistently with
// v_i = phi_inv(t_i + 1/n + psi), v_n = 1 - sum v_i. `warm_psi`, when given,
// seeds and receives the root; g is increasing, so Newton with a lazily built
// bracket is safe from any start.
Vector entropy_kkt_point_chart(const Vector& t, int n, double mu, double* warm_psi = nullptr) {
    auto g = [&](double psi, Vector* out, double* slope_out) {
        double s = 0.0, slope = 0.0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            double vi = phi_inverse(t[i] + 1.0 / n + psi, mu);
            if (out) (*out)[i] = vi;
            s += vi;
            slope += vi / (vi + mu);  // d v_i / d psi
        }
        double vn = 1.0 - s;
        if (vn <= 0.0) {
            if (slope_out) *slope_out = 0.0;
            return std::numeric_limits<double>::infinity();
        }
        if (slope_out) *slope_out = 1.0 + mu * slope / vn;
        return psi - mu * std::log(vn);
    };
    const double inf = std::numeric_limits<double>::infinity();
    double lo = -inf, hi = inf;
    double psi = warm_psi ? *warm_psi : 0.0;
    double down_step = 1.0;
    Vector v(t.size());
    for (int it = 0; it < 200; ++it) {
        double deriv = 0.0;
        double val = g(psi, &v, &deriv);
        if (std::abs(val) < 1e-13) break;
        if (val > 0.0)
            hi = psi;
        else
            lo = psi;
        double next;
        if (!std::isfinite(val) || deriv <= 0.0) {
            // Sum of heads already >= 1: psi is too large.
            next = lo > -inf ? 0.5 * (lo + hi) : psi - down_step;
            down_step *= 2.0;
        } else {
            next = psi - val / deriv;
            if (!(next > lo && next < hi))
                next = (lo > -inf && hi < inf) ? 0.5 * (lo + hi)
                                               : psi - (val > 0.0 ? down_step : -down_step);
            if (lo == -inf || hi == inf) down_step *= 2.0;
        }
        psi = next;
    }
    if (warm_psi) *warm_psi = psi;
    return v;  // first n-1 coordinates only
}

double entropy_of(const Vector& v) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] > 0.0) h -= v[i] * std::log(v[i]);
    return h;
}

}  // namespace

SimplexVector project_onto_entropy_set(const SimplexVector& target, const EntropySet& set) {
    if (target.dim() != set.n)
        throw std::invalid_argument("project_onto_entropy_set: dimension mismatch");
    if (set.c <= 0.0 || entropy(target) >= set.c) return target;
    double cmax = std::log(static_cast<double>(set.n));
    if (set.c >= cmax - 1e-12) return SimplexVector::uniform(set.n);

    const Vector& t = target.coords();
    double lo = 0.0, hi = 1.0;
    while (entropy_of(entropy_kkt_point(t, hi)) < set.c) hi *= 2.0;
    Vector best = entropy_kkt_point(t, hi);
    for (int it = 0; it < 200; ++it) {
        double mu = 0.5 * (lo + hi);
        Vector v = entropy_kkt_point(t, mu);
        double h = entropy_of(v);
        if (h >= set.c) {
            hi = mu;
            best = v;
            if (h - set.c < 1e-9) break;
        } else {
            lo = mu;
        }
    }
    return SimplexVector::normalized(best);
}

Vector project_entropy_chart(const Vector& target, const EntropySet& set,
                             double* warm_mu) {
    if (static_cast<int>(target.size()) != set.n - 1)
        throw std::invalid_argument("project_entropy_chart: dimension mismatch");
    if (set.c <= 0.0 && chart_in_simplex(target)) return target;
    if (chart_in_simplex(target)) {
        SimplexVector v = from_chart(target);
        if (entropy(v) >= set.c) return target;
    }
    double cmax = std::log(static_cast<double>(set.n));
    if (set.c >= cmax - 1e-12) return Vector::Zero(set.n - 1);

    // Check whether the entropy constraint is slack at the simplex projection.
    Vector shifted = target.array() + 1.0 / set.n;
    Vector simplex_proj = project_capped_nonneg(shifted, 1.0).array() - 1.0 / set.n;
    if (chart_in_simplex(simplex_proj)) {
        SimplexVector v = from_chart(simplex_proj);
        if (entropy(v) >= set.c - 1e-12) return simplex_proj;
    }

    auto chart_entropy = [&](const Vector& head) {
        double h = 0.0, sum = 0.0;
        for (Eigen::Index i = 0; i < head.size(); ++i) {
            if (head[i] > 0.0) h -= head[i] * std::log(head[i]);
            sum += head[i];
        }
        double vn = 1.0 - sum;
        if (vn > 0.0) h -= vn * std::log(vn);
        return h;
    };

    double lo = 0.0;
    double hi = (warm_mu && *warm_mu > 0.0) ? *warm_mu : 1.0;
    // f(mu) = H(KKT point at mu) - c is increasing; f(0) < c was certified by
    // the slack check above (the mu -> 0 limit is the plain simplex
    // projection).
    Vector sp_head = simplex_proj.array() + 1.0 / set.n;
    double f_lo = chart_entropy(sp_head) - set.c;
    double psi = 0.0;  // inner-root warm start across the mu sweep
    Vector best = entropy_kkt_point_chart(target, set.n, hi, &psi);
    double f_hi = chart_entropy(best) - set.c;
    while (f_hi < 0.0) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        best = entropy_kkt_point_chart(target, set.n, hi, &psi);
        f_hi = chart_entropy(best) - set.c;
    }
    // Illinois false-position on the bracket; sec_lo/sec_hi are the (possibly
    // damped) secant values, f_hi stays the true residual of `best`.
    double sec_lo = f_lo, sec_hi = f_hi;
    int last_side = 0;
    for (int it = 0; it < 200 && f_hi >= 1e-9; ++it) {
        double denom = sec_hi - sec_lo;
        double mu = denom > 0.0 ? hi - sec_hi * (hi - lo) / denom : 0.5 * (lo + hi);
        if (!(mu > lo && mu < hi)) mu = 0.5 * (lo + hi);
        Vector v = entropy_kkt_point_chart(target, set.n, mu, &psi);
        double f = chart_entropy(v) - set.c;
        if (f >= 0.0) {
            hi = mu;
            sec_hi = f_hi = f;
            best = std::move(v);
            if (last_side == 1) sec_lo *= 0.5;
            last_side = 1;
        } else {
            lo = mu;
            sec_lo = f;
            if (last_side == -1) sec_hi *= 0.5;
            last_side = -1;
        }
    }
    if (warm_mu) *warm_mu = hi;
    return best.array() - 1.0 / set.n;
}

// ---------------------------------------------------------------------------
// IRD polytopes.

namespace {

std::string hash_digest(const Eigen::MatrixXd& m) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        for (int b = 0; b < 8; ++b) {
            h ^= (x >> (8 * b)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(static_cast<std::uint64_t>(m.rows()));
    mix(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            std::uint64_t bits;
            double v = m(i, j);
            std::memcpy(&bits, &v, sizeof bits);
            mix(bits);
        }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace

IrdPolytope::IrdPolytope(std::vector<SimplexVector> vertices, std::string digest)
    : vertices_(std::move(vertices)), digest_(std::move(digest)) {
    if (vertices_.empty()) throw std::invalid_argument("IrdPolytope: empty vertex list");
    n_ = vertices_.front().dim();
    chart_vertices_.resize(n_ - 1, static_cast<Eigen::Index>(vertices_.size()));
    for (std::size_t j = 0; j < vertices_.size(); ++j) {
        if (vertices_[j].dim() != n_) throw std::invalid_argument("IrdPolytope: mixed dimensions");
        chart_vertices_.col(static_cast<Eigen::Index>(j)) = to_chart(vertices_[j]);
    }
    if (digest_.empty()) digest_ = hash_digest(chart_vertices_);
}

IrdPolytope ird_vertices(const PreferenceModel& m, const SimplexVector& v,
                         const MenuCatalog& catalog) {
    if (m.dim() != catalog.n()) throw std::invalid_argument("ird_vertices: dimension mismatch");
    ScoreVector s = m.evaluate(v);
    std::vector<SimplexVector> verts;
    verts.reserve(catalog.size());
    for (const Menu& menu : catalog.menus())
        verts.push_back(selection_distribution(s, menu, catalog.n()));
    return IrdPolytope(std::move(verts), "");
}

double eird_ball_radius(int n, int k) {
    if (n < 2 || k < 2) return 0.0;
    return static_cast<double>(k - 1) / (static_cast<double>(n) * (n - 1));
}

EirdMembership eird_membership_estimate(const PreferenceModel& m, const SimplexVector& x,
                                        const std::vector<SimplexVector>& probes,
                                        const MenuCatalog& catalog, double tol) {
    Vector cx = to_chart(x);
    double maxd = 0.0;
    for (const SimplexVector& v : probes) {
        IrdPolytope poly = ird_vertices(m, v, catalog);
        maxd = std::max(maxd, hull_distance(cx, poly.chart_vertices(), tol * 0.01));
    }
    return EirdMembership{maxd <= tol, maxd};
}

std::vector<SimplexVector> default_probe_set(int n, int random_count, Rng& rng) {
    std::vector<SimplexVector> probes;
    probes.reserve(random_count + n + 1);
    probes.push_back(SimplexVector::uniform(n));
    for (int i = 0; i < n; ++i) probes.push_back(SimplexVector::point_mass(n, i));
    for (int s = 0; s < random_count; ++s) probes.push_back(SimplexVector::random(n, rng));
    return probes;
}

// ---------------------------------------------------------------------------
// Decision sets.

double ConvexComponent::violation(const Vector& x) const { return (x - project(x)).norm(); }

Vector HullComponent::project(const Vector& x) const {
    return project_onto_hull(x, vertices_).point;
}

double HullComponent::violation(const Vector& x) const { return hull_distance(x, vertices_); }

Vector EntropyComponent::project(const Vector& x) const {
    return project_entropy_chart(x, set_, &warm_mu_);
}

double EntropyComponent::violation(const Vector& x) const {
    if (chart_in_simplex(x) && entropy(from_chart(x)) >= set_.c - 1e-12) return 0.0;
    return (x - project(x)).norm();
}

Vector BallComponent::project(const Vector& x) const {
    Vector d = x - center_;
    double nrm = d.norm();
    if (nrm <= radius_) return x;
    return center_ + d * (radius_ / nrm);
}

Vector BoxComponent::project(const Vector& x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
}

void DecisionSet::add(std::shared_ptr<const ConvexComponent> component) {
    components_.push_back(std::move(component));
    pinned_.push_back(false);
}

void DecisionSet::add_pinned(std::shared_ptr<const ConvexComponent> component) {
    components_.push_back(std::move(component));
    pinned_.push_back(true);
}

void DecisionSet::set_shrink(double sigma) {
    if (sigma < 1.0) throw std::invalid_argument("DecisionSet: shrink factor must be >= 1");
    shrink_ = sigma;
}

int DecisionSet::retain_most_recent(std::size_t cap) {
    if (components_.size() <= cap) return 0;
    std::size_t removable = 0;
    for (bool p : pinned_)
        if (!p) ++removable;
    std::size_t to_drop = std::min(removable, components_.size() - cap);
    int dropped = 0;
    std::vector<std::shared_ptr<const ConvexComponent>> keep;
    std::vector<bool> keep_pin;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (!pinned_[i] && static_cast<std::size_t>(dropped) < to_drop) {
            ++dropped;
            continue;
        }
        keep.push_back(components_[i]);
        keep_pin.push_back(pinned_[i]);
    }
    components_ = std::move(keep);
    pinned_ = std::move(keep_pin);
    return dropped;
}

double DecisionSet::max_violation(const Vector& x) const {
    Vector scaled = shrink_ * x;
    double worst = 0.0;
    for (const auto& comp : components_)
        worst = std::max(worst, comp->violation(scaled) / shrink_);
    return worst;
}

bool DecisionSet::contains(const Vector& x, double tol) const {
    Vector scaled = shrink_ * x;
    for (const auto& comp : components_)
        if (comp->violation(scaled) / shrink_ > tol) return false;
    return true;
}

ProjectionReport project_onto_decision_set(const Vector& target, const DecisionSet& set,
                                           double tol, int max_iter) {
    ProjectionReport report;
    if (set.components_.empty()) {
        report.point = target;
        return report;
    }
    const double sigma = set.shrink_;

    // Fast path: already feasible. The scan stops at the first component that
    // breaks the tolerance, so an infeasible target costs one violation check.
    double v0 = 0.0;
    for (const auto& comp : set.components_) {
        v0 = std::max(v0, comp->violation(set.shrink_ * target) / set.shrink_);
        if (v0 > tol) break;
    }
    if (v0 <= tol) {
        report.point = target;
        report.max_violation = v0;
        report.residuals.push_back(v0);
        return report;
    }

    // Dykstra in the unshrunken (scaled) space; similarity maps the result
    // back: proj_{C/sigma}(y) = proj_C(sigma*y)/sigma.
    Vector z = sigma * target;
    const std::size_t count = set.components_.size();
    std::vector<Vector> increments(count, Vector::Zero(z.size()));
    int cycle = 0;
    bool converged = false;
    for (; cycle < max_iter; ++cycle) {
        for (std::size_t i = 0; i < count; ++i) {
            Vector y = z + increments[i];
            Vector p = set.components_[i]->project(y);
            increments[i] = y - p;
            z = std::move(p);
        }
        double worst = 0.0;
        for (const auto& comp : set.components_) {
            worst = std::max(worst, comp->violation(z) / sigma);
            if (worst > tol) break;  // this cycle cannot converge; keep iterating
        }
        report.residuals.push_back(worst);
        if (worst <= tol) {
            converged = true;
            ++cycle;
            break;
        }
    }
    report.point = z / sigma;
    report.distance = (report.point - target).norm();
    report.iterations = cycle;
    if (converged) {
        report.max_violation = report.residuals.back();
    } else {
        // The per-cycle scans early-exit, so re-measure the true residual.
        double worst = 0.0;
        for (const auto& comp : set.components_)
            worst = std::max(worst, comp->violation(z) / sigma);
        report.max_violation = worst;
    }
    report.converged = converged;
    return report;
}

}  // namespace menurec
