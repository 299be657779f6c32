#include <doctest.h>

#include <cmath>

#include "menurec/geometry.hpp"
#include "menurec/local_learning.hpp"

using namespace menurec;

namespace {

SimplexVector make_point(std::initializer_list<double> vals) {
    Vector v(static_cast<int>(vals.size()));
    int i = 0;
    for (double x : vals) v[i++] = x;
    return SimplexVector{v};
}

// Independent mesh oracle: best feasible grid point by exhaustive scan.
SimplexVector mesh_argmin(const Vector& target_chart, const EntropySet& set, double step) {
    double best = 1e100;
    SimplexVector arg = SimplexVector::uniform(set.n);
    for (const SimplexVector& v : simplex_grid(set.n, step)) {
        if (entropy(v) < set.c) continue;
        double d = (to_chart(v) - target_chart).norm();
        if (d < best) {
            best = d;
            arg = v;
        }
    }
    return arg;
}

}  // namespace

TEST_CASE("chart round trip") {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        SimplexVector v = SimplexVector::random(5, rng);
        SimplexVector back = from_chart(to_chart(v));
        CHECK(tv_distance(v, back) == doctest::Approx(0.0).epsilon(1e-12));
    }
    CHECK(to_chart(SimplexVector::uniform(4)).norm() == doctest::Approx(0.0));
    CHECK(chart_in_simplex(to_chart(SimplexVector::uniform(4))));
    Vector far = Vector::Constant(3, 0.5);
    CHECK(!chart_in_simplex(far));
}

TEST_CASE("capped nonnegative projection matches quadratic programming facts") {
    // Free minimizer inside: identity.
    Vector in(3);
    in << 0.1, 0.2, 0.3;
    CHECK((project_capped_nonneg(in) - in).norm() == doctest::Approx(0.0));

    // Oversubscribed: lands on the simplex face, preserving differences.
    Vector over(3);
    over << 0.8, 0.6, 0.4;
    Vector p = project_capped_nonneg(over);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p[0] - p[1] == doctest::Approx(0.2));
    CHECK(p.minCoeff() >= 0.0);

    // Negative coordinates clip at zero.
    Vector neg(3);
    neg << -0.5, 0.3, 0.1;
    Vector q = project_capped_nonneg(neg);
    CHECK(q[0] == doctest::Approx(0.0));
}

TEST_CASE("hull projection agrees with brute force on small instances") {
    Rng rng(7);
    // Triangle hull in 2D with known closest points.
    Eigen::MatrixXd V(2, 3);
    V << 0.0, 1.0, 0.0,  //
        0.0, 0.0, 1.0;
    Vector t(2);
    t << -1.0, -1.0;
    HullProjection pr = project_onto_hull(t, V);
    CHECK(pr.converged);
    CHECK(pr.point.norm() == doctest::Approx(0.0));  // origin is the vertex
    t << 2.0, 2.0;
    pr = project_onto_hull(t, V);
    CHECK(pr.point[0] == doctest::Approx(0.5));
    CHECK(pr.point[1] == doctest::Approx(0.5));

    // Random instances: check optimality against a dense convex-combination
    // scan over the 3-vertex hull.
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd W = Eigen::MatrixXd::Random(2, 3);
        Vector target = Vector::Random(2) * 2.0;
        HullProjection hp = project_onto_hull(target, W);
        double best = 1e100;
        const int G = 200;
        for (int a = 0; a <= G; ++a)
            for (int b = 0; b <= G - a; ++b) {
                double wa = a / static_cast<double>(G), wb = b / static_cast<double>(G);
                Vector pt = wa * W.col(0) + wb * W.col(1) + (1 - wa - wb) * W.col(2);
                best = std::min(best, (pt - target).norm());
            }
        CHECK(hp.distance <= best + 1e-4);
        // Witness weights reproduce the point.
        CHECK((W * hp.weights - hp.point).norm() == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(hp.weights.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("entropy set projection matches the mesh oracle") {
    EntropySet set{3, 0.8 * std::log(3.0)};
    Rng rng(13);
    for (int trial = 0; trial < 15; ++trial) {
        SimplexVector t = SimplexVector::random(3, rng);
        Vector tc = to_chart(t);
        Vector proj = project_entropy_chart(tc, set);
        // Feasible up to tolerance.
        SimplexVector vp = from_chart(proj);
        CHECK(entropy(vp) >= set.c - 1e-7);
        // No mesh point is meaningfully closer (mesh step 1e-2, so the mesh
        // optimum itself is only located to ~1e-2).
        SimplexVector mesh = mesh_argmin(tc, set, 1e-2);
        CHECK((proj - tc).norm() <= (to_chart(mesh) - tc).norm() + 1e-4);
    }
    // Feasible targets are fixed points.
    Vector origin = Vector::Zero(2);
    CHECK((project_entropy_chart(origin, set) - origin).norm() == doctest::Approx(0.0));
}

TEST_CASE("full-metric entropy projection stays on the simplex") {
    EntropySet set{4, 0.9 * std::log(4.0)};
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        SimplexVector t = SimplexVector::random(4, rng);
        SimplexVector p = project_onto_entropy_set(t, set);
        CHECK(entropy(p) >= set.c - 1e-6);
        // Projection of a feasible point is itself.
        if (entropy(t) >= set.c) CHECK(tv_distance(p, t) == doctest::Approx(0.0).epsilon(1e-6));
    }
}

TEST_CASE("eird ball radius formula") {
    CHECK(eird_ball_radius(6, 2) == doctest::Approx(1.0 / 30.0));
    CHECK(eird_ball_radius(5, 2) == doctest::Approx(0.05));
    CHECK(eird_ball_radius(4, 3) == doctest::Approx(2.0 / 12.0));
}

TEST_CASE("ird polytope vertices are per-menu selection distributions") {
    BupModel m({{0.9, -0.1}, {0.7, 0.1}, {0.8}}, 0.6);
    MenuCatalog cat(3, 2);
    SimplexVector v = make_point({0.5, 0.3, 0.2});
    IrdPolytope poly = ird_vertices(m, v, cat);
    CHECK(poly.vertex_count() == 3);
    for (std::int64_t j = 0; j < cat.size(); ++j) {
        SimplexVector expect = selection_distribution(m, v, cat.menu(j));
        CHECK(tv_distance(poly.vertices()[j], expect) == doctest::Approx(0.0));
    }
}

TEST_CASE("uniform memory ird contains the interior ball center") {
    // Equal scores: every pair menu induces (1/2, 1/2), and averaging a
    // perfect matching of pairs reconstructs the uniform vector exactly.
    BupModel flat({{0.8}, {0.8}, {0.8}, {0.8}}, 0.8);
    MenuCatalog cat(4, 2);
    IrdPolytope poly = ird_vertices(flat, SimplexVector::uniform(4), cat);
    CHECK(hull_distance(Vector::Zero(3), poly.chart_vertices()) < 1e-9);

    // Mildly asymmetric scores keep the center close to the hull.
    BupModel tilted({{0.9, -0.05}, {0.85, 0.05}, {0.8}, {0.9}}, 0.75);
    IrdPolytope poly2 = ird_vertices(tilted, SimplexVector::uniform(4), cat);
    CHECK(hull_distance(Vector::Zero(3), poly2.chart_vertices()) < 0.02);
}

TEST_CASE("dykstra projection meets its residual contract") {
    Rng rng(23);
    EntropySet es{4, 0.85 * std::log(4.0)};
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}, {0.9}}, 0.75);
    MenuCatalog cat(4, 2);

    DecisionSet ds(3);
    ds.add_pinned(std::make_shared<EntropyComponent>(4, es.c));
    for (int j = 0; j < 3; ++j) {
        SimplexVector v = SimplexVector::random(4, rng);
        ds.add(std::make_shared<HullComponent>(ird_vertices(m, v, cat)));
    }
    for (int trial = 0; trial < 20; ++trial) {
        Vector t = Vector::Random(3) * 0.5;
        ProjectionReport rep = project_onto_decision_set(t, ds, 1e-8, 5000);
        CHECK(rep.converged);
        CHECK(rep.max_violation <= 1e-7);
        CHECK(ds.max_violation(rep.point) <= 1e-7);
    }
}

TEST_CASE("shrink membership equivalence") {
    // x is in the shrunken set iff sigma * x is in the plain intersection.
    Rng rng(29);
    EntropySet es{4, 0.85 * std::log(4.0)};
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}, {0.9}}, 0.75);
    MenuCatalog cat(4, 2);
    DecisionSet plain(3), shrunk(3);
    double sigma = 1.25;
    for (DecisionSet* ds : {&plain, &shrunk}) {
        ds->add_pinned(std::make_shared<EntropyComponent>(4, es.c));
        ds->add(std::make_shared<HullComponent>(ird_vertices(m, SimplexVector::uniform(4), cat)));
    }
    shrunk.set_shrink(sigma);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Vector x = Vector::Random(3) * 0.3;
        if (!chart_in_simplex(x * sigma)) continue;
        ++checked;
        bool in_shrunk = shrunk.contains(x, 1e-9);
        bool in_plain = plain.contains(x * sigma, 1e-9);
        CHECK(in_shrunk == in_plain);
    }
    CHECK(checked > 200);
}

TEST_CASE("eird membership accepts the center and rejects far points") {
    BupModel m({{0.9, -0.05}, {0.85, 0.05}, {0.8}, {0.9}}, 0.75);
    MenuCatalog cat(4, 2);
    Rng rng(31);
    auto probes = default_probe_set(4, 20, rng);
    EirdMembership center = eird_membership_estimate(m, SimplexVector::uniform(4), probes, cat);
    CHECK(center.member);
    EirdMembership corner =
        eird_membership_estimate(m, SimplexVector::point_mass(4, 0), probes, cat);
    CHECK(!corner.member);
    CHECK(corner.max_distance > 0.01);
}

TEST_CASE("box and ball components project correctly") {
    BallComponent ball(Vector::Zero(2), 1.0);
    Vector t(2);
    t << 3.0, 4.0;
    Vector p = ball.project(t);
    CHECK(p.norm() == doctest::Approx(1.0));
    CHECK(p[0] == doctest::Approx(0.6));

    Vector lo = Vector::Constant(2, -1.0), hi = Vector::Constant(2, 1.0);
    BoxComponent box(lo, hi);
    Vector q = box.project(t);
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == doctest::Approx(1.0));
    CHECK(box.violation(t) > 0.0);
    CHECK(box.violation(Vector::Zero(2)) == doctest::Approx(0.0));
}

TEST_CASE("retention cap keeps pinned components") {
    DecisionSet ds(2);
    ds.add_pinned(std::make_shared<BallComponent>(Vector::Zero(2), 1.0));
    for (int i = 0; i < 10; ++i)
        ds.add(std::make_shared<BallComponent>(Vector::Zero(2), 2.0 + i));
    int dropped = ds.retain_most_recent(4);
    CHECK(dropped == 7);  // 11 components, pinned survives, 3 newest unpinned kept
    CHECK(ds.component_count() == 4);
}
