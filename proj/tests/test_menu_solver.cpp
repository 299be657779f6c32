#include <doctest.h>

#include <cmath>

#include "menurec/menu_solver.hpp"

using namespace menurec;

namespace {

SimplexVector make_point(std::initializer_list<double> vals) {
    Vector v(static_cast<int>(vals.size()));
    int i = 0;
    for (double x : vals) v[i++] = x;
    return SimplexVector{v};
}

}  // namespace

TEST_CASE("feasible targets are induced with negligible residual") {
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}, {0.9}}, 0.75);
    MenuCatalog cat(4, 2);
    SimplexVector v = SimplexVector::uniform(4);
    // A convex combination of per-menu selection distributions is feasible by
    // construction; solve for it and check the residual.
    SimplexVector p01 = selection_distribution(m, v, cat.menu(0));
    SimplexVector p23 = selection_distribution(m, v, cat.menu(5));
    Vector mix = 0.4 * p01.coords() + 0.6 * p23.coords();
    SimplexVector target{mix};
    InductionSolution sol = solve_play_dist(m, v, target, cat);
    CHECK(sol.residual <= 1e-8);
    CHECK(tv_distance(sol.induced, target) <= 1e-8);
    CHECK(sol.support_size >= 1);
}

TEST_CASE("solved distribution matches monte carlo play") {
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}}, 0.75);
    MenuCatalog cat(3, 2);
    SimplexVector v = make_point({0.4, 0.35, 0.25});
    SimplexVector target = make_point({0.4, 0.3, 0.3});
    InductionSolution sol = solve_play_dist(m, v, target, cat);
    REQUIRE(sol.residual <= 1e-6);

    Rng rng(41);
    const int N = 200000;
    Vector freq = Vector::Zero(3);
    for (int i = 0; i < N; ++i) {
        std::int64_t j = sol.z.sample(rng);
        freq[sample_choice(m, v, cat.menu(j), rng)] += 1.0;
    }
    freq /= N;
    for (int i = 0; i < 3; ++i) {
        double p = sol.induced[i];
        CHECK(std::abs(freq[i] - p) < 4.0 * std::sqrt(p * (1 - p) / N));
    }
}

TEST_CASE("infeasible targets degrade to the closest inducible point") {
    BupModel m({{0.9}, {0.85}, {0.8}}, 0.75);
    MenuCatalog cat(3, 2);
    SimplexVector v = SimplexVector::uniform(3);
    // A point mass is far outside the IRD polytope for k = 2.
    SimplexVector target = SimplexVector::point_mass(3, 0);
    InductionSolution sol = solve_play_dist(m, v, target, cat);
    CHECK(sol.residual > 0.1);
    // The degraded point is the hull projection of the target (solver works
    // in full simplex coordinates).
    IrdPolytope poly = ird_vertices(m, v, cat);
    Eigen::MatrixXd full(3, poly.vertex_count());
    for (std::int64_t j = 0; j < poly.vertex_count(); ++j)
        full.col(j) = poly.vertices()[j].coords();
    double oracle = hull_distance(target.coords(), full);
    CHECK((sol.induced.coords() - target.coords()).norm() ==
          doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("induced distribution is the z-weighted selection average") {
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}}, 0.75);
    MenuCatalog cat(3, 2);
    SimplexVector v = make_point({0.3, 0.3, 0.4});
    Vector w(3);
    w << 0.2, 0.5, 0.3;
    MenuDistribution z(w, cat);
    SimplexVector induced = induced_distribution(m, v, z);
    Vector expect = Vector::Zero(3);
    for (int j = 0; j < 3; ++j)
        expect += w[j] * selection_distribution(m, v, cat.menu(j)).coords();
    CHECK((induced.coords() - expect).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("perturbation check bounds hypothesis-truth divergence") {
    BupModel truth({{0.9, -0.05}, {0.85, 0.05}, {0.8}}, 0.75);
    BupModel close({{0.9, -0.04}, {0.85, 0.06}, {0.8}}, 0.75);
    MenuCatalog cat(3, 2);
    SimplexVector v = SimplexVector::uniform(3);
    Vector w = Vector::Constant(3, 1.0 / 3.0);
    MenuDistribution z(w, cat);
    CHECK(perturbation_bound_check(truth, truth, v, z) == doctest::Approx(0.0));
    double d = perturbation_bound_check(close, truth, v, z);
    CHECK(d > 0.0);
    CHECK(d < 0.05);
}
