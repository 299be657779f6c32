#pragma once

#include <memory>
#include <string>
#include <vector>

#include "menurec/core_types.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

// ---------------------------------------------------------------------------
// Chart coordinates.
//
// All optimizer geometry lives in the (n-1)-dimensional chart with
// x_i = v_i - 1/n for i < n and v_n = 1 - sum_{i<n} v_i, so the uniform
// vector sits at the origin. Conversions are centralized here.

Vector to_chart(const SimplexVector& v);
SimplexVector from_chart(const Vector& x);
/// True if the chart point maps back into Delta(n) within tol.
bool chart_in_simplex(const Vector& x, double tol = 1e-9);

/// Euclidean projection onto {u >= 0, sum(u) <= cap} (cap = 1 recovers the
/// solid simplex; equality is taken when the free minimizer oversubscribes).
Vector project_capped_nonneg(const Vector& t, double cap = 1.0);

// ---------------------------------------------------------------------------
// Nearest point in a convex hull (Wolfe's min-norm-point algorithm).

struct HullProjection {
    Vector point;       ///< nearest point of the hull
    Vector weights;     ///< convex witness weights over the vertex columns
    double distance;    ///< ||point - target||
    int iterations;
    bool converged;     ///< false when the iteration cap was hit
};

/// vertices: dim x m matrix whose columns span the hull.
/// Residual ||V w - point|| is zero by construction (point = V w).
HullProjection project_onto_hull(const Vector& target, const Eigen::MatrixXd& vertices,
                                 double tol = 1e-10, int max_iter = 200);

/// Distance from target to the hull.
double hull_distance(const Vector& target, const Eigen::MatrixXd& vertices, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Entropy superlevel sets.

/// The diversity constraint {v in Delta(n) : H(v) >= c}, threshold in nats.
struct EntropySet {
    int n;
    double c;
    bool contains(const SimplexVector& v, double tol = 1e-9) const;
};

/// Euclidean-closest point of the entropy set in the full R^n metric.
/// KKT solve with bisection on the entropy multiplier, tolerance 1e-8.
SimplexVector project_onto_entropy_set(const SimplexVector& target, const EntropySet& set);

/// Same set, chart metric (used inside DecisionSet). `warm_mu`, when given,
/// seeds and receives the KKT multiplier; successive nearby targets then
/// resolve in a couple of inner solves.
Vector project_entropy_chart(const Vector& target, const EntropySet& set,
                             double* warm_mu = nullptr);

// ---------------------------------------------------------------------------
// IRD polytopes.

/// Convex hull of per-menu selection distributions at a fixed memory vector.
class IrdPolytope {
  public:
    IrdPolytope(std::vector<SimplexVector> vertices, std::string digest);

    int n() const { return n_; }
    std::int64_t vertex_count() const { return chart_vertices_.cols(); }
    const std::vector<SimplexVector>& vertices() const { return vertices_; }
    /// (n-1) x C(n,k) matrix of chart images of the vertices.
    const Eigen::MatrixXd& chart_vertices() const { return chart_vertices_; }
    const std::string& digest() const { return digest_; }

  private:
    int n_;
    std::vector<SimplexVector> vertices_;
    Eigen::MatrixXd chart_vertices_;
    std::string digest_;
};

IrdPolytope ird_vertices(const PreferenceModel& m, const SimplexVector& v,
                         const MenuCatalog& catalog);

/// (k-1)/(n(n-1)): radius of the l_inf ball around uniform guaranteed inside
/// every IRD set of a dispersed model with lambda >= k^2/n.
double eird_ball_radius(int n, int k);

struct EirdMembership {
    bool member;
    double max_distance;  ///< max over probes of chart distance to IRD(v)
};

/// Sound-negative / probabilistic-positive membership test: x is accepted iff
/// it lies within tol of IRD(v, m) for every probe memory vector.
EirdMembership eird_membership_estimate(const PreferenceModel& m, const SimplexVector& x,
                                        const std::vector<SimplexVector>& probes,
                                        const MenuCatalog& catalog, double tol = 1e-7);

/// Default probe set: `random_count` random simplex points + vertices + uniform.
std::vector<SimplexVector> default_probe_set(int n, int random_count, Rng& rng);

// ---------------------------------------------------------------------------
// Decision sets (intersections, shrinkage, Dykstra projection).

/// One convex piece of a decision set, in chart coordinates.
class ConvexComponent {
  public:
    virtual ~ConvexComponent() = default;
    virtual Vector project(const Vector& x) const = 0;
    virtual double violation(const Vector& x) const;
};

class HullComponent : public ConvexComponent {
  public:
    explicit HullComponent(Eigen::MatrixXd chart_vertices)
        : vertices_(std::move(chart_vertices)) {}
    explicit HullComponent(const IrdPolytope& poly) : vertices_(poly.chart_vertices()) {}
    Vector project(const Vector& x) const override;
    double violation(const Vector& x) const override;

  private:
    Eigen::MatrixXd vertices_;
};

class EntropyComponent : public ConvexComponent {
  public:
    EntropyComponent(int n, double c) : set_{n, c} {}
    Vector project(const Vector& x) const override;
    double violation(const Vector& x) const override;

  private:
    EntropySet set_;
    // Multiplier warm start for consecutive projections (single-threaded use).
    mutable double warm_mu_ = 0.0;
};

/// Euclidean ball, for synthetic optimizer instances.
class BallComponent : public ConvexComponent {
  public:
    BallComponent(Vector center, double radius)
        : center_(std::move(center)), radius_(radius) {}
    Vector project(const Vector& x) const override;

  private:
    Vector center_;
    double radius_;
};

/// Axis-aligned box, for synthetic contracting-interval instances.
class BoxComponent : public ConvexComponent {
  public:
    BoxComponent(Vector lower, Vector upper)
        : lower_(std::move(lower)), upper_(std::move(upper)) {}
    Vector project(const Vector& x) const override;

  private:
    Vector lower_;
    Vector upper_;
};

struct ProjectionReport {
    Vector point;
    double distance = 0.0;       ///< ||point - target||
    int iterations = 0;          ///< Dykstra cycles used
    double max_violation = 0.0;  ///< residual after the last cycle
    std::vector<double> residuals;
    bool converged = true;
};

/// Growing intersection of convex components with a multiplicative shrink
/// factor sigma = r/(r - delta - eps); x is in the shrunken set iff
/// sigma * x is in the intersection.
class DecisionSet {
  public:
    explicit DecisionSet(int chart_dim) : chart_dim_(chart_dim) {}

    void add(std::shared_ptr<const ConvexComponent> component);
    void set_shrink(double sigma);
    double shrink() const { return shrink_; }
    int chart_dim() const { return chart_dim_; }
    std::size_t component_count() const { return components_.size(); }
    const std::vector<std::shared_ptr<const ConvexComponent>>& components() const {
        return components_;
    }
    /// Drops the oldest removable components until at most `cap` remain;
    /// components added with `pinned` stay forever. Returns how many dropped.
    int retain_most_recent(std::size_t cap);
    void add_pinned(std::shared_ptr<const ConvexComponent> component);

    /// Membership in the shrunken intersection.
    double max_violation(const Vector& x) const;
    bool contains(const Vector& x, double tol = 1e-7) const;

  private:
    friend ProjectionReport project_onto_decision_set(const Vector&, const DecisionSet&, double,
                                                      int);
    int chart_dim_;
    double shrink_ = 1.0;
    std::vector<std::shared_ptr<const ConvexComponent>> components_;
    std::vector<bool> pinned_;
};

/// Dykstra alternating projections across the shrunken components until the
/// max per-set violation is <= tol or the cycle cap is hit (flagged report).
ProjectionReport project_onto_decision_set(const Vector& target, const DecisionSet& set,
                                           double tol = 1e-7, int max_iter = 10000);

}  // namespace menurec
