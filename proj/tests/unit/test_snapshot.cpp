#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "ecdnn/error.hpp"
#include "ecdnn/snapshot.hpp"

using namespace ecdnn;

TEST_CASE("f64 hex encoding") {
    CHECK(encode_f64(1.0) == "3ff0000000000000");
    CHECK(decode_f64("3ff0000000000000") == 1.0);
    for (double v : {0.1, -0.0, 1e-310, std::numeric_limits<double>::max()}) {
        const double back = decode_f64(encode_f64(v));
        CHECK(std::signbit(back) == std::signbit(v));
        CHECK(back == v);
    }
    CHECK_THROWS_AS(decode_f64("xyz"), InvalidInput);
}

TEST_CASE("snapshot round trip is bit exact") {
    const DenseNet net = DenseNet::initialize(Layout({3, 5, 2}), 42);
    CHECK(snapshot_from_string(snapshot_to_string(net)) == net);
    const auto path = std::filesystem::temp_directory_path() / "ecdnn_snapshot_test.json";
    save_snapshot(path, net);
    CHECK(load_snapshot(path) == net);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_snapshot(path), IoError);
    CHECK_THROWS_AS(snapshot_from_string(R"({"format":"other"})"), InvalidInput);
    CHECK_THROWS_AS(snapshot_from_string(R"({"format":"ecdnn-snapshot","version":1,"layer_sizes":[1,2],"activations":[],"values":[]})"),
                    LayoutMismatch);
}
