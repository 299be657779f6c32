#include "menurec/menu_solver.hpp"

namespace menurec {

InductionSolution solve_play_dist(const PreferenceModel& hypothesis, const SimplexVector& v,
                                  const SimplexVector& x_target, const MenuCatalog& catalog) {
    const int n = catalog.n();
    if (hypothesis.dim() != n || x_target.dim() != n)
        throw std::invalid_argument("solve_play_dist: dimension mismatch");

    // Solve in full simplex coordinates so the reported residual and the
    // hull distance share a metric.
    ScoreVector s = hypothesis.evaluate(v);
    Eigen::MatrixXd V(n, catalog.size());
    for (std::int64_t j = 0; j < catalog.size(); ++j)
        V.col(j) = selection_distribution(s, catalog.menu(j), n).coords();

    HullProjection proj = project_onto_hull(x_target.coords(), V, 1e-11, 400);

    int support = 0;
    for (Eigen::Index j = 0; j < proj.weights.size(); ++j)
        if (proj.weights[j] > 0.0) ++support;

    SimplexVector induced = SimplexVector::normalized(proj.point.cwiseMax(0.0));
    double residual = (induced.coords() - x_target.coords()).norm();
    return InductionSolution{MenuDistribution(proj.weights, catalog), std::move(induced),
                             residual, support};
}

SimplexVector induced_distribution(const PreferenceModel& m, const SimplexVector& v,
                                   const MenuDistribution& z) {
    const MenuCatalog& catalog = z.catalog();
    if (m.dim() != catalog.n())
        throw std::invalid_argument("induced_distribution: dimension mismatch");
    ScoreVector s = m.evaluate(v);
    Vector acc = Vector::Zero(catalog.n());
    for (std::int64_t j = 0; j < catalog.size(); ++j) {
        double w = z.weights()[j];
        if (w == 0.0) continue;
        acc += w * selection_distribution(s, catalog.menu(j), catalog.n()).coords();
    }
    return SimplexVector::normalized(acc);
}

double perturbation_bound_check(const PreferenceModel& hypothesis, const PreferenceModel& truth,
                                const SimplexVector& v, const MenuDistribution& z) {
    SimplexVector p_true = induced_distribution(truth, v, z);
    SimplexVector p_hyp = induced_distribution(hypothesis, v, z);
    return (p_true.coords() - p_hyp.coords()).norm();
}

}  // namespace menurec
