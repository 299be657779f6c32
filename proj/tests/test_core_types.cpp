#include <doctest.h>

#include <cmath>

#include "menurec/core_types.hpp"

using namespace menurec;

TEST_CASE("uniform simplex vector") {
    SimplexVector u = SimplexVector::uniform(4);
    CHECK(u[0] == doctest::Approx(0.25));
    CHECK(entropy(u) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("simplex vector validation") {
    Vector good(3);
    good << 0.2, 0.3, 0.5;
    CHECK_NOTHROW(SimplexVector{good});

    Vector negative(3);
    negative << -0.1, 0.6, 0.5;
    CHECK_THROWS(SimplexVector{negative});

    Vector off_mass(3);
    off_mass << 0.2, 0.3, 0.6;
    CHECK_THROWS(SimplexVector{off_mass});

    Vector raw(3);
    raw << 2.0, 3.0, 5.0;
    SimplexVector nrm = SimplexVector::normalized(raw);
    CHECK(nrm[2] == doctest::Approx(0.5));
    CHECK_THROWS(SimplexVector::normalized(Vector::Zero(3)));
}

TEST_CASE("point mass and entropy edge cases") {
    SimplexVector pm = SimplexVector::point_mass(5, 2);
    CHECK(pm[2] == doctest::Approx(1.0));
    CHECK(pm[0] == doctest::Approx(0.0));
    // 0*log(0) treated as 0: entropy of a point mass is exactly 0.
    CHECK(entropy(pm) == doctest::Approx(0.0));

    // Hand value: H(0.5, 0.25, 0.25) = 1.5 * ln 2.
    Vector v(3);
    v << 0.5, 0.25, 0.25;
    CHECK(entropy(SimplexVector{v}) == doctest::Approx(1.5 * std::log(2.0)));
}

TEST_CASE("total variation distance") {
    SimplexVector a = SimplexVector::point_mass(4, 0);
    SimplexVector b = SimplexVector::point_mass(4, 3);
    CHECK(tv_distance(a, b) == doctest::Approx(1.0));
    CHECK(tv_distance(a, a) == doctest::Approx(0.0));
    Vector v(4);
    v << 0.5, 0.5, 0.0, 0.0;
    CHECK(tv_distance(SimplexVector{v}, SimplexVector::uniform(4)) == doctest::Approx(0.5));
}

TEST_CASE("random simplex points are valid") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        SimplexVector v = SimplexVector::random(6, rng);
        double sum = v.coords().sum();
        CHECK(sum == doctest::Approx(1.0));
        CHECK(v.coords().minCoeff() >= 0.0);
    }
}

TEST_CASE("histogram memory updates are exact") {
    Histogram h(3);
    CHECK(h.total() == 0);
    h.record(0);
    h.record(0);
    h.record(2);
    CHECK(h.total() == 3);
    CHECK(h.count(0) == 2);
    SimplexVector v = h.normalize();
    CHECK(v[0] == doctest::Approx(2.0 / 3.0));

    // v_{t+1} = e_i/(t+1) + t v_t/(t+1), exactly.
    Histogram h2 = update_memory(h, 1);
    SimplexVector v2 = h2.normalize();
    for (int i = 0; i < 3; ++i) {
        double expect = (i == 1 ? 1.0 : 0.0) / 4.0 + 3.0 * v[i] / 4.0;
        CHECK(v2[i] == doctest::Approx(expect).epsilon(1e-15));
    }
    CHECK_THROWS(Histogram(3).normalize());
}

TEST_CASE("menus are sorted and validated") {
    Menu m({3, 1}, 5);
    CHECK(m.items() == std::vector<int>{1, 3});
    CHECK(m.contains(3));
    CHECK(!m.contains(2));
    CHECK_THROWS(Menu({1, 1}, 5));
    CHECK_THROWS(Menu({0, 5}, 5));
}

TEST_CASE("menu catalog is lexicographic with index lookup") {
    MenuCatalog cat(4, 2);
    CHECK(cat.size() == 6);
    CHECK(cat.menu(0).items() == std::vector<int>{0, 1});
    CHECK(cat.menu(5).items() == std::vector<int>{2, 3});
    for (std::int64_t j = 0; j < cat.size(); ++j) CHECK(cat.index(cat.menu(j)) == j);

    // Catalog refuses to materialize past the cap.
    CHECK_THROWS(MenuCatalog(40, 20, 1000));
}

TEST_CASE("binomial coefficients") {
    CHECK(binomial(6, 2) == 15);
    CHECK(binomial(5, 5) == 1);
    CHECK(binomial(10, 3) == 120);
}

TEST_CASE("menu distribution sampling matches weights") {
    MenuCatalog cat(4, 2);
    Vector w = Vector::Zero(cat.size());
    w[1] = 0.25;
    w[4] = 0.75;
    MenuDistribution z(w, cat);
    Rng rng(5);
    int hits4 = 0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        std::int64_t j = z.sample(rng);
        CHECK((j == 1 || j == 4));
        if (j == 4) ++hits4;
    }
    // 4-sigma band around 0.75 at N = 20000.
    CHECK(std::abs(hits4 / static_cast<double>(N) - 0.75) < 4.0 * std::sqrt(0.1875 / N));
}

TEST_CASE("rng streams are deterministic and label-split") {
    Rng a(42), b(42);
    for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
    Rng c(42);
    Rng d = c.split("other");
    Rng e = c.split("other");
    CHECK(d.uniform() == e.uniform());
    Rng f = c.split("different");
    CHECK(d.uniform() != f.uniform());
}
