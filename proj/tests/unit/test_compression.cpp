#include <doctest.h>

#include "ecdnn/aggregation.hpp"
#include "ecdnn/compression.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/training.hpp"
#include "support.hpp"

using namespace ecdnn;
using namespace testing_support;

TEST_CASE("beta schedule") {
    const BetaSchedule s = default_beta_schedule();
    CHECK(beta_at(s, 0.0) == 0.4);
    CHECK(beta_at(s, 0.1999) == 0.4);
    CHECK(beta_at(s, 0.2) == 0.6);
    CHECK(beta_at(s, 1.0) == 0.6);
    CHECK_THROWS_AS(validate_beta_schedule({{0.1, 0.4}}), ConfigError);
    CHECK_THROWS_AS(validate_beta_schedule({{0.0, 0.4}, {0.0, 0.6}}), ConfigError);
    CHECK_THROWS_AS(validate_beta_schedule({{0.0, -1.0}}), ConfigError);
}

TEST_CASE("relabel plan subset") {
    RelabelPlan plan;
    CHECK(plan.subset_size(10) == 7);
    CHECK(plan.subset_size(100) == 70);
    CHECK(plan.subset_size(3) == 3);
    plan.mu = 1.0;
    CHECK(plan.subset_size(5) == 5);
    plan.mu = 0.0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.mu = 0.7;
    plan.seed = 9;
    const auto a = plan.select(50), b = plan.select(50);
    CHECK(a == b);
    CHECK(a.size() == 35);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
}

TEST_CASE("make_pseudo_labels") {
    Rng rng(1);
    const Layout layout({2, 4, 3});
    const LabeledBatch batch = random_batch(7, 2, 3, rng);
    const DenseNet a = random_net(layout, rng);
    SUBCASE("single member") {
        const std::vector<DenseNet> members{a};
        const auto labels = make_pseudo_labels(members, batch.inputs);
        for (std::size_t i = 0; i < batch.size(); ++i) CHECK(labels[i] == a.forward(batch.inputs[i]));
    }
    SUBCASE("identical members") {
        const std::vector<DenseNet> members{a, a, a};
        const auto labels = make_pseudo_labels(members, batch.inputs);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const Vector want = a.forward(batch.inputs[i]);
            for (std::size_t c = 0; c < 3; ++c) CHECK(labels[i][c] == doctest::Approx(want[c]).epsilon(1e-15));
        }
    }
    SUBCASE("agrees with ensemble_predict and stays within two model buffers") {
        const std::vector<DenseNet> members{a, random_net(layout, rng), random_net(layout, rng)};
        MemoryProbe probe;
        const ModelHold own(&probe);
        const auto labels = make_pseudo_labels(members, batch.inputs, &probe);
        const EnsembleModel ens(members);
        for (std::size_t i = 0; i < batch.size(); ++i) CHECK(labels[i] == ensemble_predict(ens, batch.inputs[i]));
        CHECK(probe.peak_models() == 2);
        CHECK(probe.peak_sums() == 1);
    }
}

TEST_CASE("compress") {
    Rng rng(2);
    const Layout layout({2, 6, 2});
    const LabeledBatch data = random_batch(40, 2, 2, rng);
    const std::vector<DenseNet> members{random_net(layout, rng), random_net(layout, rng)};
    const DenseNet local = random_net(layout, rng);
    const RelabelPlan plan{0.7, 5, default_beta_schedule()};

    SUBCASE("p = 0 returns the local model untouched") {
        OptState opt = OptState::for_params(local.params(), 0.05, 0.9, 1e-4);
        const auto before = opt.velocity;
        const auto r = compress(local.params(), members, data, plan, 0, opt);
        CHECK(r.params == local.params());
        CHECK(r.steps == 0);
        CHECK(opt.velocity == before);
    }
    SUBCASE("beta = 0 reduces to plain training on the same subset and order") {
        const RelabelPlan zero{0.7, 5, {{0.0, 0.0}}};
        OptState opt = OptState::for_params(local.params(), 0.05, 0.9, 1e-4);
        const auto r = compress(local.params(), members, data, zero, 12, opt, {8, 77, std::nullopt, nullptr});

        DenseNet net = local;
        OptState ref_opt = OptState::for_params(local.params(), 0.05, 0.9, 1e-4);
        const LabeledBatch subset = gather(data, zero.select(data.size()));
        BatchSampler sampler(subset.size(), 8, 77);
        for (int i = 0; i < 12; ++i) train_step(net, gather(subset, sampler.next()), PlainLoss{}, ref_opt);
        CHECK(r.params == net.params());
        CHECK(r.steps == 12);
    }
    SUBCASE("fifty small steps do not increase the compression loss on the relabeled subset") {
        OptState opt = OptState::for_params(local.params(), 0.01, 0.0, 0.0);
        const auto r = compress(local.params(), members, data, plan, 50, opt, {32, 3, 0.0, nullptr});
        const double before = compression_loss(local, r.relabeled, 0.4);
        const double after = compression_loss(DenseNet(r.params), r.relabeled, 0.4);
        MESSAGE("compression loss " << before << " -> " << after);
        CHECK(after <= before);
        CHECK(r.relabeled.size() == 28);
        CHECK(r.relabeled.soft_targets.has_value());
    }
}
