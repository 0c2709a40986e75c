#include "ecdnn/fixtures.hpp"

#include "ecdnn/data.hpp"
#include "ecdnn/rng.hpp"
#include "ecdnn/snapshot.hpp"
#include "ecdnn/training.hpp"

namespace ecdnn {

namespace {

LabeledBatch symmetric_sample(std::size_t pairs, Rng& rng) {
    LabeledBatch out;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double x = rng.uniform(-2.0, 2.0);
        const std::size_t label = std::abs(x) > 1.0 ? 1 : 0;
        out.inputs.push_back({x});
        out.labels.push_back(label);
        out.inputs.push_back({-x});
        out.labels.push_back(label);
    }
    return out;
}

}  // namespace

DenseNet mirror_first_layer(const DenseNet& net) {
    DenseNet out = net;
    const Layout& layout = net.layout();
    const std::size_t begin = layout.weight_offset(0);
    const std::size_t count = layout.layer_sizes()[0] * layout.layer_sizes()[1];
    for (std::size_t i = begin; i < begin + count; ++i) out.params()[i] = -out.params()[i];
    return out;
}

MirrorBasin build_mirror_basin(std::uint64_t seed) {
    Rng rng(derive_seed({seed, 1}));
    MirrorBasin basin;
    basin.train = symmetric_sample(200, rng);
    basin.test = symmetric_sample(100, rng);

    const Layout layout({1, kMirrorHidden, 2});
    DenseNet net = DenseNet::initialize(layout, derive_seed({seed, 2}));
    OptState opt = OptState::for_params(net.params(), 0.1, 0.9, 0.0);
    BatchSampler sampler(basin.train.size(), 32, derive_seed({seed, 3}));
    for (int step = 0; step < 4000; ++step) {
        const auto idx = sampler.next();
        train_step(net, gather(basin.train, idx), PlainLoss{}, opt);
    }
    basin.member_a = net;
    basin.member_b = mirror_first_layer(net);
    return basin;
}

void save_mirror_basin(const std::filesystem::path& dir, const MirrorBasin& basin) {
    std::filesystem::create_directories(dir);
    save_snapshot(dir / "member_a.json", basin.member_a);
    save_snapshot(dir / "member_b.json", basin.member_b);
    write_csv(dir / "train.csv", basin.train);
    write_csv(dir / "test.csv", basin.test);
}

MirrorBasin load_mirror_basin(const std::filesystem::path& dir) {
    return {load_snapshot(dir / "member_a.json"), load_snapshot(dir / "member_b.json"), read_csv(dir / "train.csv"),
            read_csv(dir / "test.csv")};
}

}  // namespace ecdnn
