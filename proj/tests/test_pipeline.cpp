#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "patchcrf/pipeline.hpp"
#include "synthetic_dataset.hpp"

using namespace patchcrf;
namespace fs = std::filesystem;

namespace {

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.grid_side = 3;
    cfg.gmm_components = 2;
    cfg.kl_samples = 2000;
    cfg.seed = 42;
    return cfg;
}

// One trained model shared by the read-only subchecks; training is the
// expensive part of this suite.
struct Fixture {
    std::string root;
    DatasetManifest manifest;
    TrainedModel model;

    Fixture() {
        root = testing::make_temp_dir("pipeline");
        testing::generate_synthetic_dataset(root, 6, 1234);
        manifest = ingest(root);
        model = train_model(manifest, quick_config());
    }
    ~Fixture() { fs::remove_all(root); }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

} // namespace

TEST_CASE("trained model shape") {
    const auto& f = fixture();
    CHECK(f.model.class_names ==
          std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(f.model.patch_count() == 9);
    CHECK(f.model.gmms.size() == 3);
    CHECK(f.model.transition.q.size() == 3);
    CHECK(f.model.svm.machines.size() == 3);
    for (const auto& row : f.model.transition.q) {
        double sum = 0.0;
        for (double v : row) sum += v;
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("probabilistic feature layout and normalization") {
    const auto& f = fixture();
    const auto img = testing::synthetic_image(0, 999);
    const auto feat = featurize_image(f.model, img);
    const std::size_t n = f.model.patch_count();
    const std::size_t m = f.model.class_count();
    REQUIRE(feat.size() == n * m);
    // each position's marginals sum to 1, so the feature sums to n
    double total = 0.0;
    for (double v : feat) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        total += v;
    }
    CHECK(total == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
    for (std::size_t k = 0; k < n; ++k) {
        double row = 0.0;
        for (std::size_t c = 0; c < m; ++c) row += feat[c * n + k];
        CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("training classifies its own data") {
    const auto& f = fixture();
    const auto report = evaluate(f.model, f.manifest);
    CHECK(report.total == 18);
    CHECK(report.accuracy >= 0.9);
    REQUIRE(report.confusion.size() == 3);
    std::size_t sum = 0;
    for (const auto& row : report.confusion)
        for (std::size_t v : row) sum += v;
    CHECK(sum == report.total);
}

TEST_CASE("prediction on fresh draws of a known class") {
    const auto& f = fixture();
    std::size_t correct = 0;
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto p = predict(f.model, testing::synthetic_image(1, 5000 + s));
        REQUIRE(p.decisions.size() == 3);
        if (p.class_name == "beta") ++correct;
    }
    CHECK(correct >= 5);
}

TEST_CASE("training is deterministic and thread-count independent") {
    const auto& f = fixture();
    const auto again = train_model(f.manifest, quick_config(), 1);
    const auto threaded = train_model(f.manifest, quick_config(), 4);
    const std::string a = serialize_model(f.model);
    CHECK(a == serialize_model(again));
    CHECK(a == serialize_model(threaded));
}

TEST_CASE("save, load, and refeaturize") {
    const auto& f = fixture();
    const fs::path path = fs::path(testing::make_temp_dir("model")) / "m.json";
    save_model(f.model, path.string());

    const auto loaded = load_model(path.string());
    CHECK(serialize_model(loaded) == serialize_model(f.model));

    const auto img = testing::synthetic_image(2, 31);
    const auto before = featurize_image(f.model, img);
    const auto after = featurize_image(loaded, img);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(before[i] == after[i]); // bitwise: the loaded model is identical
    CHECK(predict(loaded, img).class_index == predict(f.model, img).class_index);
    fs::remove_all(path.parent_path());
}

TEST_CASE("schema validation") {
    const auto& f = fixture();
    const std::string text = serialize_model(f.model);

    SUBCASE("not JSON") {
        CHECK_THROWS_AS(deserialize_model("not json at all"), SchemaError);
    }
    SUBCASE("wrong format tag") {
        auto doc = nlohmann::json::parse(text);
        doc["format"] = "something-else";
        CHECK_THROWS_AS(deserialize_model(doc.dump()), SchemaError);
    }
    SUBCASE("future version") {
        auto doc = nlohmann::json::parse(text);
        doc["version"] = TrainedModel::kVersion + 1;
        CHECK_THROWS_AS(deserialize_model(doc.dump()), VersionMismatch);
    }
    SUBCASE("missing field names its path") {
        auto doc = nlohmann::json::parse(text);
        doc["gmms"][0].erase("weights");
        try {
            deserialize_model(doc.dump());
            FAIL("expected SchemaError");
        } catch (const SchemaError& e) {
            CHECK(std::string(e.what()).find("$.gmms[0]") != std::string::npos);
        }
    }
    SUBCASE("mistyped field") {
        auto doc = nlohmann::json::parse(text);
        doc["config"]["grid_side"] = "three";
        CHECK_THROWS_AS(deserialize_model(doc.dump()), SchemaError);
    }
    SUBCASE("transition shape") {
        auto doc = nlohmann::json::parse(text);
        doc["transition"][0].erase(0);
        CHECK_THROWS_AS(deserialize_model(doc.dump()), SchemaError);
    }
}

TEST_CASE("dataset preconditions") {
    const auto root = testing::make_temp_dir("tiny");
    testing::generate_synthetic_dataset(root, 1, 7);
    const auto manifest = ingest(root);

    SUBCASE("too few images per class") {
        CHECK_THROWS_AS(train_model(manifest, quick_config()), DatasetTooSmall);
    }
    SUBCASE("too few classes") {
        DatasetManifest one;
        one.root = manifest.root;
        one.classes = {manifest.classes.front()};
        CHECK_THROWS_AS(train_model(one, quick_config()), DatasetTooSmall);
    }
    fs::remove_all(root);
}

TEST_CASE("evaluate rejects unknown classes") {
    const auto& f = fixture();
    DatasetManifest bogus = f.manifest;
    bogus.classes[0].name = "delta";
    CHECK_THROWS_AS(evaluate(f.model, bogus), UnknownLabel);
}

TEST_CASE("serialized documents") {
    const auto& f = fixture();
    SUBCASE("feature document") {
        const auto feat = featurize_image(f.model, testing::synthetic_image(0, 3));
        const auto doc = nlohmann::json::parse(serialize_feature(f.model, feat));
        CHECK(doc["n"] == 9);
        CHECK(doc["m"] == 3);
        CHECK(doc["values"].size() == 27);
    }
    SUBCASE("report document") {
        const auto report = evaluate(f.model, f.manifest);
        const auto doc = nlohmann::json::parse(serialize_report(report));
        CHECK(doc["total"] == 18);
        CHECK(doc["confusion"].size() == 3);
        CHECK(doc["accuracy"].get<double>() == report.accuracy);
    }
}
