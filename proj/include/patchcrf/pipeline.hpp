#ifndef PATCHCRF_PIPELINE_HPP
#define PATCHCRF_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "patchcrf/crf_chain.hpp"
#include "patchcrf/dataset.hpp"
#include "patchcrf/descriptor.hpp"
#include "patchcrf/gmm.hpp"
#include "patchcrf/grid_scan.hpp"
#include "patchcrf/image.hpp"
#include "patchcrf/svm.hpp"
#include "patchcrf/transition.hpp"

namespace patchcrf {

struct TrainConfig {
    std::size_t grid_side = 3; // n = grid_side^2 patches
    ScanOrder order = ScanOrder::Zigzag;
    std::size_t gmm_components = 4;
    std::size_t kl_samples = 100000;
    bool transition_include_self = true;
    double svm_c = 10.0;
    double svm_gamma = 0.0; // <= 0 means 1 / feature dimension
    double svm_tol = 1e-3;
    std::size_t patch_size = 32; // descriptor working size
    std::uint64_t seed = 42;
};

struct TrainedModel {
    static constexpr int kVersion = 1;

    TrainConfig config;
    std::vector<std::string> class_names; // lexicographic, fixes all indexing
    FeatureScaler scaler;
    std::vector<GmmModel> gmms; // one per class
    TransitionMatrix transition;
    OneVsAllSvm svm;

    std::size_t class_count() const { return class_names.size(); }
    std::size_t patch_count() const { return config.grid_side * config.grid_side; }
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<std::string> class_names;
    std::vector<double> per_class_accuracy;
    std::vector<std::vector<std::size_t>> confusion; // [truth][predicted]
    std::size_t total = 0;
};

struct Prediction {
    std::string class_name;
    std::size_t class_index = 0;
    std::vector<double> decisions;
};

// Full training run over a class-per-directory manifest: describe every
// patch, fit the scaler, per-class GMMs, the transition matrix, then the
// one-vs-all SVM over the chain marginal features. Deterministic for a
// fixed (manifest, config); thread count never changes the result.
TrainedModel train_model(const DatasetManifest& dataset, const TrainConfig& cfg,
                         unsigned threads = 1);

// The exact patch -> describe -> scale -> chain -> marginals path used in
// training, applied to one decoded image.
ProbabilisticFeature featurize_image(const TrainedModel& model,
                                     const GrayImage& image);

Prediction predict(const TrainedModel& model, const GrayImage& image);

EvalReport evaluate(const TrainedModel& model, const DatasetManifest& dataset,
                    unsigned threads = 1);

// Versioned JSON document; decimal floats, stable key order, so identical
// models serialize to identical bytes.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(const std::string& text);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

std::string serialize_report(const EvalReport& report);

// Featurize output document: {n, m, classes, values}.
std::string serialize_feature(const TrainedModel& model,
                              const ProbabilisticFeature& feature);

} // namespace patchcrf

#endif
