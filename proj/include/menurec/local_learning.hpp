#pragma once

#include <string>
#include <vector>

#include "menurec/core_types.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

/// Deterministic query set for one model family, confined to an alpha-ball
/// around the uniform vector.
struct QueryPlan {
    std::string family;  // bup | bmlp | bnmp | sfr
    int n = 0;
    int degree = 0;          // polynomial degree d, or sparsity l for sfr
    double alpha = 0.0;      // query-ball radius
    double Z = 0.0;          // family-specific node scaling
    double freq_bound = 0.0; // sfr only: |eta| <= freq_bound
    std::vector<SimplexVector> points;

    std::string digest() const;
};

/// Builds the family's query plan. Throws if alpha is too small to separate
/// nodes, or the family tag is unknown.
QueryPlan plan_queries(const std::string& family, int n, int degree, double alpha,
                       double freq_bound = 8.0);

/// Normalized score estimates, one per plan point, aligned by index.
using QueryAnswers = std::vector<SimplexVector>;

/// Closed-form answers M(x)/M*_x for every plan point (exact-query regime).
QueryAnswers exact_answers(const PreferenceModel& truth, const QueryPlan& plan);

/// Exact answers perturbed per-coordinate by uniform(-beta, beta) noise and
/// renormalized; the renormalization keeps the perturbation O(n*beta).
QueryAnswers noisy_answers(const PreferenceModel& truth, const QueryPlan& plan, double beta,
                           Rng& rng);

struct Hypothesis {
    ModelPtr model;
    double epsilon_hat = 0.0;  ///< conservative error estimate (monotone in beta)
    std::string plan_digest;
    bool degenerate = false;   ///< case discrimination was near its threshold
};

/// beta is the caller-declared noise bound on the answers (0 = exact).
Hypothesis fit_bup(const QueryPlan& plan, const QueryAnswers& answers, double beta = 0.0);
Hypothesis fit_bmlp(const QueryPlan& plan, const QueryAnswers& answers, double beta = 0.0);
Hypothesis fit_bnmp(const QueryPlan& plan, const QueryAnswers& answers, double beta = 0.0);
Hypothesis fit_sfr(const QueryPlan& plan, const QueryAnswers& answers, double beta = 0.0);

/// Dispatch on plan.family.
Hypothesis fit_hypothesis(const QueryPlan& plan, const QueryAnswers& answers, double beta = 0.0);

/// Max over the grid of the l2 distance between normalized score vectors.
double hypothesis_error(const PreferenceModel& hyp, const PreferenceModel& truth,
                        const std::vector<SimplexVector>& grid);

/// All points of Delta(n) on a lattice of the given step (step = 1/m).
/// Throws once the point count would exceed `cap`.
std::vector<SimplexVector> simplex_grid(int n, double step, std::int64_t cap = 20000000);

/// The beta -> epsilon conversion constant of each family's learnability
/// bound, with a safety multiplier (default 2). lambda is the dispersion
/// floor of the model class being learned.
double f_ll_constant(const std::string& family, int n, int degree, double alpha, double lambda,
                     double safety = 2.0);

/// Condition numbers of the degree-d interpolation matrix at query scale
/// alpha (first) and at the reference scale 1/2 (second).
std::pair<double, double> bnmp_condition(int n, int degree, double alpha);

}  // namespace menurec
