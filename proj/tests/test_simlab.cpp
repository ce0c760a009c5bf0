#include "lassoinf/errors.hpp"
#include "lassoinf/random_stream.hpp"
#include "lassoinf/simlab.hpp"

#include <doctest.h>

#include <cmath>

using namespace lassoinf;

TEST_CASE("design generation") {
    SUBCASE("orthogonal") {
        RandomStream s(41, 0);
        const Matrix x = generate_design({30, 12, Correlation::orthogonal, 0.0}, s);
        CHECK((x.transpose() * x - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK_THROWS_AS(generate_design({10, 12, Correlation::orthogonal, 0.0}, s), DomainError);
    }
    SUBCASE("unit norm columns") {
        RandomStream s(41, 1);
        for (Correlation c : {Correlation::ar1, Correlation::equicorrelated}) {
            const Matrix x = generate_design({25, 9, c, 0.4}, s);
            for (Index j = 0; j < 9; ++j) CHECK(x.col(j).norm() == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    SUBCASE("ar1 adjacent correlation") {
        RandomStream s(41, 2);
        const Matrix x = generate_design({10000, 5, Correlation::ar1, 0.5}, s);
        for (Index j = 0; j + 1 < 5; ++j) {
            const Vector a = x.col(j).array() - x.col(j).mean();
            const Vector b = x.col(j + 1).array() - x.col(j + 1).mean();
            CHECK(std::abs(a.dot(b) / (a.norm() * b.norm()) - 0.5) <= 0.03);
        }
    }
    SUBCASE("invalid specs") {
        RandomStream s(41, 3);
        CHECK_THROWS_AS(generate_design({10, 3, Correlation::ar1, 1.0}, s), DomainError);
        CHECK_THROWS_AS(generate_design({10, 3, Correlation::equicorrelated, -0.1}, s), DomainError);
        CHECK_THROWS_AS(generate_design({0, 3, Correlation::ar1, 0.1}, s), DomainError);
    }
}

TEST_CASE("response generation") {
    RandomStream s(42, 0);
    const Matrix x = generate_design({20, 5, Correlation::ar1, 0.3}, s);
    Vector beta = Vector::Zero(5);
    beta[1] = 2.0;
    CHECK((generate_response(x, beta, 0.0, s) - x * beta).cwiseAbs().maxCoeff() == 0.0);
    RandomStream a(42, 1);
    RandomStream b(42, 1);
    CHECK(generate_response(x, beta, 1.0, a) == generate_response(x, beta, 1.0, b));
    CHECK_THROWS_AS(generate_response(x, Vector::Zero(4), 1.0, s), DomainError);

    RandomStream big(42, 2);
    const Matrix xb = generate_design({20000, 1, Correlation::ar1, 0.0}, big);
    const Vector y = generate_response(xb, Vector::Zero(1), 2.0, big);
    const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
    CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("signal spec") {
    SignalSpec s;
    s.k0 = 3;
    s.beta_min = 2.0;
    s.signs = SignPattern::alternating;
    const Vector b = s.coefficients(6);
    CHECK(b[0] == 2.0);
    CHECK(b[1] == -2.0);
    CHECK(b[2] == 2.0);
    CHECK(b.tail(3).isZero());
    s.support = {5, 1, 3};
    CHECK(s.resolved_support() == IndexSet{5, 1, 3});
    CHECK_THROWS_AS(s.validate(4), DomainError);
}

TEST_CASE("classic metrics") {
    const IndexSet truth{0, 1, 2};
    const auto none = classic_metrics(IndexSet{}, truth);
    CHECK(none.fp == 0);
    CHECK(none.tp == 0);
    CHECK_FALSE(none.fwer_violation);
    const auto exact = classic_metrics(truth, truth);
    CHECK(exact.tp == 3);
    CHECK(exact.fp == 0);
    const auto extra = classic_metrics(IndexSet{0, 1, 2, 7, 8}, truth);
    CHECK(extra.fp == 2);
    CHECK(extra.fwer_violation);
}

TEST_CASE("uvr metric") {
    RandomStream s(43, 0);
    const Matrix x = generate_design({30, 6, Correlation::ar1, 0.3}, s);
    CHECK(uvr_metric(IndexSet{0, 2}, x, Vector::Zero(6)).uvr == 1.0);

    Vector beta = Vector::Zero(6);
    beta[1] = 1.5;
    beta[4] = -2.0;
    const UvrResult self = uvr_metric(IndexSet{1, 4}, x, beta);
    CHECK(self.uvr == 0.0);
    CHECK(self.projection[0] == doctest::Approx(1.5));
    CHECK(self.projection[1] == doctest::Approx(-2.0));

    // two predictors with correlation 0.95; selecting only the null one is still informative
    Matrix x2 = Matrix::Zero(3, 2);
    x2(0, 0) = 1.0;
    x2(0, 1) = 0.95;
    x2(1, 1) = std::sqrt(1.0 - 0.95 * 0.95);
    Vector b2(2);
    b2 << 5.0, 0.0;
    const UvrResult proxy = uvr_metric(IndexSet{1}, x2, b2);
    CHECK(proxy.projection[0] == doctest::Approx(5.0 * 0.95));
    CHECK(proxy.uvr == 0.0);
    CHECK(classic_metrics(IndexSet{1}, IndexSet{0}).fp == 1);

    Matrix dup = x;
    dup.col(3) = dup.col(2);
    CHECK_THROWS_AS(uvr_metric(IndexSet{2, 3}, dup, beta), SingularityError);
    CHECK_THROWS_AS(uvr_metric(IndexSet{}, x, beta), DomainError);
}

TEST_CASE("screening experiment") {
    ScreeningConfig c;
    c.design = {50, 30, Correlation::ar1, 0.3};
    c.signal.k0 = 4;
    c.signal.beta_min = 6.0;
    c.k_grid = {2, 3, 4, 8, 12};
    c.beta_min_grid = {2.0, 6.0};
    c.reps = 200;
    const ScreeningResult r = screening_experiment(c);
    REQUIRE(r.table.size() == 10);
    CHECK(r.records.size() == 200 * 10);
    for (const auto& cell : r.table) {
        if (cell.k < 4) CHECK(cell.prob == 0.0);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t k = 0; k + 1 < 5; ++k) {
            const auto& a = r.table[i * 5 + k];
            const auto& b = r.table[i * 5 + k + 1];
            CHECK(b.prob >= a.prob - 2.0 * std::max(a.se, b.se));
        }
    }
    c.signal.k0 = 0;
    for (const auto& cell : screening_experiment(c).table) CHECK(cell.prob == 1.0);
    c.reps = 0;
    CHECK_THROWS_AS(screening_experiment(c), DomainError);
}

TEST_CASE("experiments are independent of the thread count") {
    QQConfig q;
    q.design = {30, 8, Correlation::ar1, 0.5};
    q.steps = 3;
    q.methods = {TestMethod::covariance, TestMethod::spacing, TestMethod::tmax, TestMethod::tmax_conditional};
    q.reps = 24;
    q.n_mc = 100;
    const auto one = qq_experiment(q);
    q.threads = 4;
    const auto four = qq_experiment(q);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].rep == four[i].rep);
        CHECK(one[i].step == four[i].step);
        CHECK(one[i].method == four[i].method);
        CHECK(one[i].pvalue == four[i].pvalue);
    }
    q.methods.clear();
    CHECK_THROWS_AS(qq_experiment(q), DomainError);
}

TEST_CASE("fdr experiment") {
    FdrConfig f;
    f.design = {60, 30, Correlation::ar1, 0.2};
    f.signal.k0 = 1;
    f.signal.beta_min = 50.0;
    f.sigma = 1.0;
    f.steps = 10;
    f.reps = 200;
    const FdrResult r = fdr_experiment(f);
    CHECK(r.metrics.avg_tp == doctest::Approx(1.0));
    CHECK(r.metrics.avg_fp <= 0.25);
    CHECK(r.metrics.fdr <= 0.1);
    for (const auto& rec : r.records) CHECK(rec.fp + rec.tp == rec.k_hat);

    f.signal.k0 = 0;
    f.sigma = 1.0;
    f.reps = 100;
    const FdrResult null = fdr_experiment(f);
    CHECK(null.metrics.avg_fp + null.metrics.avg_tp == doctest::Approx(null.metrics.avg_selected));
    CHECK(null.metrics.fdr <= 0.2);
    f.reps = 0;
    CHECK_THROWS_AS(fdr_experiment(f), DomainError);
}

TEST_CASE("equicorrelated limit experiment") {
    EquicorrConfig e;
    e.p = 200;
    e.rho = 0.5;
    e.reps = 50;
    const EquicorrResult a = equicorr_limit_experiment(e);
    const EquicorrResult b = equicorr_limit_experiment(e);
    CHECK(a.centered_max == b.centered_max);
    CHECK(a.ks_distance >= 0.0);
    CHECK(a.ks_distance <= 1.0);

    e.rho = 0.999999;
    e.reps = 2000;
    const EquicorrResult tight = equicorr_limit_experiment(e);
    double m = 0.0;
    for (double v : tight.centered_max) m += v;
    m /= 2000.0;
    double var = 0.0;
    for (double v : tight.centered_max) var += (v - m) * (v - m);
    var /= 1999.0;
    // V1 -> |Z0| as rho -> 1, so the spread tends to Var|N(0,1)| = 1 - 2/pi
    CHECK(var == doctest::Approx(1.0 - 2.0 / M_PI).epsilon(0.1));
    e.rho = 1.0;
    CHECK_THROWS_AS(equicorr_limit_experiment(e), DomainError);
    e.rho = 0.5;
    e.p = 1;
    CHECK_THROWS_AS(equicorr_limit_experiment(e), DomainError);
}
