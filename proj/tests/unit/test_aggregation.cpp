#include <doctest.h>

#include <cmath>

#include "ecdnn/aggregation.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/fixtures.hpp"
#include "support.hpp"

using namespace ecdnn;
using namespace testing_support;

TEST_CASE("ma_aggregate") {
    const Layout layout({1, 1});
    SUBCASE("idempotent") {
        const ParameterVector v(layout, Vector{0.1, -0.7});
        CHECK(ma_aggregate(std::vector<ParameterVector>(4, v)) == v);
        const ParameterVector three = ma_aggregate(std::vector<ParameterVector>(3, v));
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(three[i] == doctest::Approx(v[i]).epsilon(1e-15));
    }
    SUBCASE("two vectors") {
        const std::vector<ParameterVector> list{ParameterVector(layout, Vector{1, 3}),
                                                ParameterVector(layout, Vector{3, 1})};
        CHECK(ma_aggregate(list).values()[0] == 2.0);
        CHECK(ma_aggregate(list).values()[1] == 2.0);
    }
    SUBCASE("elementwise mean of five random vectors") {
        Rng rng(1);
        const Layout big({3, 4, 2});
        std::vector<ParameterVector> list;
        for (int k = 0; k < 5; ++k) list.push_back(random_net(big, rng).params());
        const ParameterVector avg = ma_aggregate(list);
        for (std::size_t i = 0; i < avg.size(); ++i) {
            double s = 0.0;
            for (const auto& p : list) s += p[i];
            CHECK(avg[i] == doctest::Approx(s / 5).epsilon(1e-14));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(ma_aggregate(std::vector<ParameterVector>{}), InvalidInput);
        const std::vector<ParameterVector> mixed{ParameterVector(layout), ParameterVector(Layout({1, 2}))};
        CHECK_THROWS_AS(ma_aggregate(mixed), LayoutMismatch);
    }
}

TEST_CASE("ensemble_predict") {
    Rng rng(2);
    const Layout layout({2, 3, 3});
    const DenseNet a = random_net(layout, rng);
    const Vector x{0.4, -0.9};
    SUBCASE("identical members") {
        const EnsembleModel ens({a, a, a});
        const Vector got = ensemble_predict(ens, x), want = a.forward(x);
        for (std::size_t c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-15));
    }
    SUBCASE("two one-hot members") {
        DenseNet p = DenseNet::zeros(Layout({1, 2})), q = p;
        p.params()[p.layout().bias_offset(0)] = 1000.0;
        q.params()[q.layout().bias_offset(0) + 1] = 1000.0;
        const Vector got = ensemble_predict(EnsembleModel({p, q}), Vector{0.0});
        CHECK(got[0] == doctest::Approx(0.5));
        CHECK(got[1] == doctest::Approx(0.5));
    }
    SUBCASE("mean of four random members") {
        std::vector<DenseNet> members;
        for (int k = 0; k < 4; ++k) members.push_back(random_net(layout, rng));
        const Vector got = ensemble_predict(EnsembleModel(members), x);
        for (std::size_t c = 0; c < 3; ++c) {
            double s = 0.0;
            for (const auto& m : members) s += reference_forward(m, x)[c];
            CHECK(got[c] == doctest::Approx(s / 4).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(EnsembleModel({}), InvalidInput);
    CHECK_THROWS_AS(EnsembleModel({a, DenseNet::zeros(Layout({2, 3}))}), LayoutMismatch);
}

TEST_CASE("jensen_gap") {
    Rng rng(3);
    const Layout layout({2, 4, 3});
    const LabeledBatch batch = random_batch(8, 2, 3, rng);
    SUBCASE("identical members") {
        const DenseNet a = random_net(layout, rng);
        const auto gap = jensen_gap(EnsembleModel({a, a}), batch);
        CHECK(gap.lhs == gap.rhs);
    }
    SUBCASE("closed form with confident opposite members") {
        const double eps = 1e-6;
        DenseNet p = DenseNet::zeros(Layout({1, 2})), q = p;
        p.params()[p.layout().bias_offset(0)] = std::log((1 - eps) / eps);
        q.params()[q.layout().bias_offset(0) + 1] = std::log((1 - eps) / eps);
        const LabeledBatch one{{Vector{0.0}}, {0}, std::nullopt};
        const auto gap = jensen_gap(EnsembleModel({p, q}), one);
        CHECK(gap.lhs == doctest::Approx(std::log(2.0)).epsilon(1e-9));
        CHECK(gap.rhs == doctest::Approx((-std::log(eps) - std::log(1 - eps)) / 2).epsilon(1e-9));
        CHECK(gap.rhs == doctest::Approx(6.9078).epsilon(1e-4));
        CHECK(gap.lhs < gap.rhs);
    }
    SUBCASE("random sweep") {
        int violations = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<DenseNet> members;
            for (std::size_t k = 0; k < 2 + rng.below(4); ++k) members.push_back(random_net(layout, rng, 2.0));
            const auto gap = jensen_gap(EnsembleModel(members), random_batch(5, 2, 3, rng));
            if (gap.lhs > gap.rhs + 1e-9) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("ma_nonconvex_probe") {
    Rng rng(4);
    const Layout layout({2, 3, 2});
    const LabeledBatch batch = random_batch(6, 2, 2, rng);
    SUBCASE("identical members") {
        const ParameterVector p = random_net(layout, rng).params();
        const std::vector<ParameterVector> list{p, p};
        const auto probe = ma_nonconvex_probe(list, batch);
        CHECK(probe.averaged_model_loss == doctest::Approx(probe.mean_member_loss).epsilon(1e-15));
    }
    SUBCASE("random members give finite values") {
        std::vector<ParameterVector> list;
        for (int k = 0; k < 3; ++k) list.push_back(random_net(layout, rng, 3.0).params());
        const auto probe = ma_nonconvex_probe(list, batch);
        CHECK(std::isfinite(probe.averaged_model_loss));
        CHECK(std::isfinite(probe.mean_member_loss));
    }
    SUBCASE("stored mirror-basin fixture") {
        const MirrorBasin basin = load_mirror_basin(ECDNN_FIXTURE_DIR);
        const std::vector<ParameterVector> list{basin.member_a.params(), basin.member_b.params()};
        const auto probe = ma_nonconvex_probe(list, basin.train);
        CHECK(probe.averaged_model_loss > probe.mean_member_loss + 0.1);
        CHECK(basin.member_b == mirror_first_layer(basin.member_a));
    }
}
