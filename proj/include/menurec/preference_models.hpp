#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "menurec/core_types.hpp"

namespace menurec {

/// Per-item preference scores. Scores live in (0, 1]; the producing model's
/// declared dispersion floor is carried alongside for sanity checks.
struct ScoreVector {
    Vector scores;
    double lambda_floor = 0.0;
};

/// The Agent side: maps a memory vector to item scores. Any input outside
/// Delta(n) (e.g. the empty history) yields the all-ones score vector.
class PreferenceModel {
  public:
    virtual ~PreferenceModel() = default;

    virtual int dim() const = 0;
    virtual double lambda() const = 0;
    virtual std::string family() const = 0;

    ScoreVector evaluate(const SimplexVector& v) const {
        return ScoreVector{scores_at(v), lambda()};
    }
    /// Empty-history convention: uniform score vector.
    ScoreVector evaluate_empty() const {
        return ScoreVector{Vector::Ones(dim()), lambda()};
    }

  protected:
    virtual Vector scores_at(const SimplexVector& v) const = 0;
};

using ModelPtr = std::shared_ptr<const PreferenceModel>;

/// Per-item univariate polynomials: score_i = f_i(v_i).
class BupModel : public PreferenceModel {
  public:
    /// coeffs[i][p] is the coefficient of x^p in f_i. If verify_range is set,
    /// a dense grid scan (step 1e-4) checks f_i([0,1]) stays in [lambda, 1].
    BupModel(std::vector<std::vector<double>> coeffs, double lambda, bool verify_range = true);

    int dim() const override { return static_cast<int>(coeffs_.size()); }
    double lambda() const override { return lambda_; }
    std::string family() const override { return "bup"; }
    const std::vector<std::vector<double>>& coeffs() const { return coeffs_; }
    int degree() const { return degree_; }

    double eval_item(int i, double x) const;

  protected:
    Vector scores_at(const SimplexVector& v) const override;

  private:
    std::vector<std::vector<double>> coeffs_;
    double lambda_;
    int degree_;
};

/// Multivariate polynomial models. Monomials are stored as (variable list,
/// coefficient) pairs over the full n variables; the multilinear family
/// restricts each monomial to distinct variables.
struct Monomial {
    std::vector<int> vars;  // sorted, possibly with repeats (BNMP only)
    double coeff = 0.0;
};

class MultivariatePolyModel : public PreferenceModel {
  public:
    MultivariatePolyModel(int n, std::vector<std::vector<Monomial>> item_polys, double lambda,
                          bool multilinear, std::optional<double> normalization,
                          bool verify_range = true);

    int dim() const override { return n_; }
    double lambda() const override { return lambda_; }
    std::string family() const override { return multilinear_ ? "bmlp" : "bnmp"; }
    bool multilinear() const { return multilinear_; }
    std::optional<double> normalization() const { return normalization_; }
    const std::vector<std::vector<Monomial>>& item_polys() const { return item_polys_; }

    double eval_item(int i, const Vector& v) const;

  protected:
    Vector scores_at(const SimplexVector& v) const override;

  private:
    int n_;
    std::vector<std::vector<Monomial>> item_polys_;
    double lambda_;
    bool multilinear_;
    std::optional<double> normalization_;
};

/// Sparse-Fourier models: score_i = f_i(v_i) with f_i a real-valued sparse
/// trigonometric sum. Frequencies are stored as conjugate pairs (plus an
/// optional DC term) so evaluation is real by construction.
class SfrModel : public PreferenceModel {
  public:
    struct Component {
        double frequency;                // eta >= 0; eta > 0 implies a conjugate pair
        std::complex<double> magnitude;  // xi for +eta; the -eta term is conj(xi)
    };

    SfrModel(std::vector<std::vector<Component>> item_components, double lambda,
             double freq_bound, double separation, double lipschitz, bool verify_range = true);

    int dim() const override { return static_cast<int>(components_.size()); }
    double lambda() const override { return lambda_; }
    std::string family() const override { return "sfr"; }
    const std::vector<std::vector<Component>>& components() const { return components_; }
    double freq_bound() const { return freq_bound_; }
    double separation() const { return separation_; }
    double lipschitz() const { return lipschitz_; }

    double eval_item(int i, double x) const;

  protected:
    Vector scores_at(const SimplexVector& v) const override;

  private:
    std::vector<std::vector<Component>> components_;
    double lambda_;
    double freq_bound_;
    double separation_;
    double lipschitz_;
};

/// Wraps an arbitrary score function; ground-truth oracle in tests.
class TabularOracleModel : public PreferenceModel {
  public:
    using ScoreFn = std::function<Vector(const SimplexVector&)>;

    TabularOracleModel(int n, double lambda, ScoreFn fn)
        : n_(n), lambda_(lambda), fn_(std::move(fn)) {}

    int dim() const override { return n_; }
    double lambda() const override { return lambda_; }
    std::string family() const override { return "oracle"; }

  protected:
    Vector scores_at(const SimplexVector& v) const override { return fn_(v); }

  private:
    int n_;
    double lambda_;
    ScoreFn fn_;
};

/// Projects another model's scores into the admissible [lambda_floor, 1] band.
/// Scores already inside the band pass through; an out-of-band vector is first
/// rescaled so its max lands at 1 (a per-memory positive rescale, which leaves
/// every selection distribution unchanged) and then clamped. Noisy fits can
/// otherwise emit negative or wild scores whose induced hulls lose the
/// interior ball that the contracting projections rely on.
class DispersionGuard : public PreferenceModel {
  public:
    DispersionGuard(ModelPtr base, double lambda_floor)
        : base_(std::move(base)), floor_(lambda_floor) {}

    int dim() const override { return base_->dim(); }
    double lambda() const override { return floor_; }
    std::string family() const override { return base_->family(); }
    const ModelPtr& base() const { return base_; }

  protected:
    Vector scores_at(const SimplexVector& v) const override;

  private:
    ModelPtr base_;
    double floor_;
};

/// Menu-restricted selection probabilities: proportional to scores on the
/// menu, zero elsewhere.
SimplexVector selection_distribution(const PreferenceModel& m, const SimplexVector& v,
                                     const Menu& menu);
SimplexVector selection_distribution(const ScoreVector& s, const Menu& menu, int n);

int sample_choice(const PreferenceModel& m, const SimplexVector& v, const Menu& menu, Rng& rng);

struct DispersionReport {
    bool pass = true;
    double worst_score = 1.0;
    SimplexVector worst_point;
};

/// Samples random simplex points plus all vertices and the uniform vector;
/// fails if any score drops below lambda (tolerance 1e-9).
DispersionReport verify_dispersion(const PreferenceModel& m, double lambda, int samples, Rng& rng);

/// Closed-form models behind the two linear-regret constructions.
/// which=1: the rising-item model (requires lambda < 0.5).
/// which=2: the (a,b,c) commitment model (requires eps > lambda).
ModelPtr build_lower_bound_model(int which, int n, double lambda, double eps = 0.1);

/// Model definition file (JSON): family tag, n, lambda, coefficient arrays.
/// Round-trips losslessly. The optional provenance block is used when saving
/// fitted hypotheses.
struct ModelProvenance {
    std::string fit_family;
    double epsilon_hat = 0.0;
    std::string plan_digest;
};

std::string model_to_json(const PreferenceModel& m,
                          const std::optional<ModelProvenance>& provenance = std::nullopt);
ModelPtr model_from_json(const std::string& text);
ModelPtr load_model_file(const std::string& path);
void save_model_file(const PreferenceModel& m, const std::string& path,
                     const std::optional<ModelProvenance>& provenance = std::nullopt);

}  // namespace menurec
