#pragma once

#include "menurec/core_types.hpp"
#include "menurec/geometry.hpp"
#include "menurec/preference_models.hpp"

namespace menurec {

/// A menu distribution together with the item distribution it induces under
/// the hypothesis it was solved against.
struct InductionSolution {
    MenuDistribution z;
    SimplexVector induced;  ///< sum_j z_j * p_{K_j, v} under the hypothesis
    double residual;        ///< ||induced - x_target||_2
    int support_size;       ///< number of menus with nonzero weight
};

/// Finds a menu distribution whose induced item distribution matches
/// x_target under the hypothesis. Solved as nearest-point-in-hull over the
/// per-menu selection distributions, so infeasible targets degrade to the
/// closest inducible point; the residual is then the caller's perturbation.
InductionSolution solve_play_dist(const PreferenceModel& hypothesis, const SimplexVector& v,
                                  const SimplexVector& x_target, const MenuCatalog& catalog);

/// Item distribution induced by playing z against model m at memory v.
SimplexVector induced_distribution(const PreferenceModel& m, const SimplexVector& v,
                                   const MenuDistribution& z);

/// ||induced under truth - induced under hypothesis||_2 for a fixed play.
double perturbation_bound_check(const PreferenceModel& hypothesis, const PreferenceModel& truth,
                                const SimplexVector& v, const MenuDistribution& z);

}  // namespace menurec
