#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ecdnn/data.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/training.hpp"

using namespace ecdnn;

TEST_CASE("synthetic generators are deterministic") {
    for (auto kind : {SyntheticKind::gaussians, SyntheticKind::spirals, SyntheticKind::xor_rings}) {
        const SyntheticSpec spec{kind, 300, 2, 3, 0.1, 5};
        const Dataset a = generate_synthetic(spec), b = generate_synthetic(spec);
        CHECK(a.train.inputs == b.train.inputs);
        CHECK(a.test.labels == b.test.labels);
        CHECK(a.train.size() == 240);
        CHECK(a.test.size() == 60);
        SyntheticSpec other = spec;
        other.seed = 6;
        CHECK(generate_synthetic(other).train.inputs != a.train.inputs);
    }
}

TEST_CASE("spirals class counts are balanced") {
    const Dataset d = generate_synthetic({SyntheticKind::spirals, 3000, 2, 3, 0.05, 1});
    std::size_t counts[3] = {0, 0, 0};
    for (auto y : d.train.labels) ++counts[y];
    for (auto y : d.test.labels) ++counts[y];
    const auto [lo, hi] = std::minmax({counts[0], counts[1], counts[2]});
    CHECK(hi - lo <= 1);
}

TEST_CASE("noise-free separated gaussians are linearly separable") {
    const Dataset d = generate_synthetic({SyntheticKind::gaussians, 200, 2, 2, 0.0, 3});
    DenseNet net = DenseNet::initialize(Layout({2, 2}), 1);
    OptState opt = OptState::for_params(net.params(), 0.1, 0.0, 0.0);
    BatchSampler sampler(d.train.size(), 16, 2);
    for (int i = 0; i < 200; ++i) train_step(net, gather(d.train, sampler.next()), PlainLoss{}, opt);
    CHECK(error_rate(net, d.test) == 0.0);
}

TEST_CASE("invalid synthetic parameters") {
    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::spirals, 2, 2, 3, 0.1, 1}), ConfigError);
    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::spirals, 100, 3, 3, 0.1, 1}), ConfigError);
    CHECK_THROWS_AS(generate_synthetic({SyntheticKind::gaussians, 100, 2, 1, 0.1, 1}), ConfigError);
    CHECK_THROWS_AS(synthetic_kind_from_string("moons"), ConfigError);
    CHECK(synthetic_kind_from_string("xor-rings") == SyntheticKind::xor_rings);
}

TEST_CASE("csv round trip is exact") {
    const Dataset d = generate_synthetic({SyntheticKind::spirals, 60, 2, 3, 0.1, 2});
    const auto path = std::filesystem::temp_directory_path() / "ecdnn_data_test.csv";
    write_csv(path, d.train);
    const LabeledBatch back = read_csv(path);
    CHECK(back.inputs == d.train.inputs);
    CHECK(back.labels == d.train.labels);
    {
        std::ofstream out(path);
        out << "label,f0\n1,0.5\nx,0.2\n";
    }
    CHECK_THROWS_AS(read_csv(path), InvalidInput);
    {
        std::ofstream out(path);
        out << "label,f0,f1\n1,0.5\n";
    }
    CHECK_THROWS_AS(read_csv(path), InvalidInput);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_csv(path), IoError);
}

TEST_CASE("idx parsing") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto images = dir / "ecdnn_images.idx", labels = dir / "ecdnn_labels.idx";
    {
        std::ofstream out(images, std::ios::binary);
        const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 1};
        out.write(reinterpret_cast<const char*>(header), sizeof header);
        const unsigned char pixels[] = {0, 255, 51, 102};
        out.write(reinterpret_cast<const char*>(pixels), sizeof pixels);
    }
    {
        std::ofstream out(labels, std::ios::binary);
        const unsigned char bytes[] = {0, 0, 8, 1, 0, 0, 0, 2, 7, 3};
        out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
    }
    const auto x = read_idx_images(images);
    REQUIRE(x.size() == 2);
    CHECK(x[0] == Vector{0.0, 1.0});
    CHECK(x[1][0] == doctest::Approx(0.2));
    CHECK(read_idx_labels(labels) == std::vector<std::size_t>{7, 3});
    {
        std::ofstream out(labels, std::ios::binary);
        const unsigned char bytes[] = {0, 0, 8, 1, 0, 0, 0, 5, 7};
        out.write(reinterpret_cast<const char*>(bytes), sizeof bytes);
    }
    CHECK_THROWS_AS(read_idx_labels(labels), InvalidInput);
    std::filesystem::remove(images);
    std::filesystem::remove(labels);
}
