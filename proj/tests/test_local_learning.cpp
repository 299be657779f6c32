#include <doctest.h>

#include <cmath>

#include "menurec/local_learning.hpp"
#include "menurec/scenarios.hpp"

using namespace menurec;

TEST_CASE("simplex grid counts match stars and bars") {
    // Points with coordinates in steps of 1/m: C(m + n - 1, n - 1).
    CHECK(simplex_grid(3, 0.5).size() == 6);    // C(4,2)
    CHECK(simplex_grid(3, 0.25).size() == 15);  // C(6,2)
    CHECK(simplex_grid(4, 0.25).size() == 35);  // C(7,3)
    for (const SimplexVector& v : simplex_grid(3, 0.25))
        CHECK(v.coords().sum() == doctest::Approx(1.0));
    CHECK_THROWS(simplex_grid(8, 1e-3));  // exceeds the cap
}

TEST_CASE("query plans stay inside the alpha ball") {
    for (const char* family : {"bup", "bmlp", "bnmp", "sfr"}) {
        QueryPlan plan = plan_queries(family, 4, family == std::string("sfr") ? 2 : 1, 0.01);
        CHECK(!plan.points.empty());
        SimplexVector u = SimplexVector::uniform(4);
        for (const SimplexVector& p : plan.points)
            CHECK((p.coords() - u.coords()).norm() <= 0.01 + 1e-12);
        CHECK(!plan.digest().empty());
    }
    CHECK_THROWS(plan_queries("unknown", 4, 1, 0.01));
}

TEST_CASE("exact answers recover bup models") {
    Rng rng(51);
    for (int n : {3, 4, 5}) {
        for (int d : {1, 2}) {
            ModelPtr truth = random_model("bup", n, d, 0.55, rng);
            QueryPlan plan = plan_queries("bup", n, d, 1e-3);
            Hypothesis hyp = fit_bup(plan, exact_answers(*truth, plan));
            double err = hypothesis_error(*hyp.model, *truth, simplex_grid(n, 0.05));
            CHECK(err <= 1e-6);
        }
    }
}

TEST_CASE("exact answers recover bmlp models") {
    Rng rng(52);
    ModelPtr truth = random_model("bmlp", 3, 1, 0.55, rng);
    QueryPlan plan = plan_queries("bmlp", 3, 1, 1e-3);
    Hypothesis hyp = fit_bmlp(plan, exact_answers(*truth, plan));
    double err = hypothesis_error(*hyp.model, *truth, simplex_grid(3, 0.05));
    CHECK(err <= 1e-6);
}

TEST_CASE("exact answers recover bnmp models") {
    Rng rng(53);
    ModelPtr truth = random_model("bnmp", 3, 2, 0.55, rng);
    QueryPlan plan = plan_queries("bnmp", 3, 2, 1e-3);
    Hypothesis hyp = fit_bnmp(plan, exact_answers(*truth, plan));
    double err = hypothesis_error(*hyp.model, *truth, simplex_grid(3, 0.05));
    CHECK(err <= 1e-6);
}

TEST_CASE("exact answers recover sfr models") {
    Rng rng(54);
    ModelPtr truth = random_model("sfr", 3, 2, 0.5, rng);
    QueryPlan plan = plan_queries("sfr", 3, 2, 1e-3);
    Hypothesis hyp = fit_sfr(plan, exact_answers(*truth, plan));
    double err = hypothesis_error(*hyp.model, *truth, simplex_grid(3, 0.05));
    CHECK(err <= 1e-6);
}

TEST_CASE("fit dispatch matches the family fitters") {
    Rng rng(55);
    ModelPtr truth = random_model("bup", 4, 1, 0.55, rng);
    QueryPlan plan = plan_queries("bup", 4, 1, 1e-3);
    QueryAnswers ans = exact_answers(*truth, plan);
    Hypothesis a = fit_hypothesis(plan, ans);
    Hypothesis b = fit_bup(plan, ans);
    CHECK(a.plan_digest == b.plan_digest);
    CHECK(a.epsilon_hat == doctest::Approx(b.epsilon_hat));
    CHECK(hypothesis_error(*a.model, *b.model, simplex_grid(4, 0.1)) <= 1e-12);
}

TEST_CASE("epsilon estimate is monotone in the noise bound") {
    Rng rng(56);
    ModelPtr truth = random_model("bup", 4, 2, 0.55, rng);
    QueryPlan plan = plan_queries("bup", 4, 2, 1e-3);
    double last = -1.0;
    for (double beta : {1e-8, 1e-6, 1e-4, 1e-3}) {
        Rng noise_rng(77);
        Hypothesis hyp = fit_bup(plan, noisy_answers(*truth, plan, beta, noise_rng), beta);
        CHECK(hyp.epsilon_hat >= last);
        last = hyp.epsilon_hat;
    }
}

TEST_CASE("noisy answers stay near the exact ones") {
    Rng rng(57);
    ModelPtr truth = random_model("bup", 4, 1, 0.55, rng);
    QueryPlan plan = plan_queries("bup", 4, 1, 1e-3);
    QueryAnswers exact = exact_answers(*truth, plan);
    Rng noise_rng(78);
    QueryAnswers noisy = noisy_answers(*truth, plan, 1e-4, noise_rng);
    REQUIRE(noisy.size() == exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i)
        CHECK(tv_distance(exact[i], noisy[i]) < 4 * 1e-4 * 4);
}

TEST_CASE("learnability constants are positive and finite") {
    for (const char* family : {"bup", "bmlp", "bnmp", "sfr"}) {
        double f = f_ll_constant(family, 4, 2, 1e-3, 0.7);
        CHECK(f > 0.0);
        CHECK(std::isfinite(f));
    }
    auto [cond_alpha, cond_ref] = bnmp_condition(3, 2, 1e-3);
    CHECK(cond_alpha >= cond_ref);  // shrinking the query ball worsens conditioning
    CHECK(cond_ref >= 1.0);
}
