#include "patchcrf/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "patchcrf/parallel.hpp"
#include "patchcrf/rng.hpp"

using nlohmann::json;

namespace patchcrf {

namespace {

// Sub-seed tags; fixed so adding or removing parallelism cannot shift any
// module's random stream.
constexpr std::uint64_t kTagGmm = 0x67'6d'6d;  // "gmm"
constexpr std::uint64_t kTagKl = 0x6b'6c;      // "kl"
constexpr std::uint64_t kTagSvm = 0x73'76'6d;  // "svm"

const GaborBank& shared_bank() {
    static GaborBank bank;
    return bank;
}

// Patch features of one image in scan order, before standardization.
std::vector<FeatureVector> raw_patch_features(const GrayImage& image,
                                              const TrainConfig& cfg) {
    const GridSpec grid{cfg.grid_side, cfg.grid_side};
    const CellPath path = scan_sequence(grid, cfg.order);
    const auto regions = partition_image(image.height, image.width, grid);
    const auto ordered = order_patches(regions, path, grid);

    std::vector<FeatureVector> features;
    features.reserve(ordered.size());
    for (const auto& region : ordered) {
        GrayImage patch = crop(image, region);
        patch = resize_bilinear(patch, cfg.patch_size, cfg.patch_size);
        features.push_back(shared_bank().describe(patch));
    }
    return features;
}

double effective_gamma(const TrainConfig& cfg, std::size_t feature_dim) {
    return cfg.svm_gamma > 0.0 ? cfg.svm_gamma
                               : 1.0 / static_cast<double>(feature_dim);
}

ProbabilisticFeature chain_feature(const TrainedModel& model,
                                   const std::vector<FeatureVector>& scaled) {
    const UnaryPotentials u = compute_unaries(model.gmms, scaled);
    const LogTransition lq = to_log(model.transition);
    auto [alpha, log_z_fwd] = forward(u, lq);
    auto [beta, log_z_bwd] = backward(u, lq);
    (void)log_z_fwd;
    (void)log_z_bwd;
    return assemble_feature(marginals(u, alpha, beta));
}

void validate_config(const TrainConfig& cfg) {
    if (cfg.grid_side < 1) throw Error("grid side must be >= 1");
    if (cfg.gmm_components < 1) throw Error("GMM needs >= 1 component");
    if (cfg.kl_samples < 1) throw Error("KL sampling needs >= 1 sample");
    if (cfg.patch_size != GaborBank::kPatchSize)
        throw Error("descriptor working size is fixed at " +
                    std::to_string(GaborBank::kPatchSize));
}

} // namespace

TrainedModel train_model(const DatasetManifest& dataset, const TrainConfig& cfg,
                         unsigned threads) {
    validate_config(cfg);
    if (dataset.classes.size() < 2)
        throw DatasetTooSmall("training needs at least 2 classes, got " +
                              std::to_string(dataset.classes.size()));
    const std::size_t min_images = std::max<std::size_t>(2, cfg.gmm_components);
    for (const auto& cls : dataset.classes)
        if (cls.files.size() < min_images)
            throw DatasetTooSmall("class '" + cls.name + "' has " +
                                  std::to_string(cls.files.size()) +
                                  " images; need at least " +
                                  std::to_string(min_images));

    TrainedModel model;
    model.config = cfg;
    for (const auto& cls : dataset.classes) model.class_names.push_back(cls.name);
    const std::size_t m = model.class_count();
    const std::size_t n = model.patch_count();

    // Flat image list; manifest order fixes the feature order everywhere.
    std::vector<std::pair<std::size_t, std::string>> files; // (class, path)
    for (std::size_t c = 0; c < dataset.classes.size(); ++c)
        for (const auto& f : dataset.classes[c].files) files.emplace_back(c, f);

    // 1) Describe every patch of every training image.
    std::vector<std::vector<FeatureVector>> per_image(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        GrayImage img = load_image(files[i].second);
        try {
            per_image[i] = raw_patch_features(img, cfg);
        } catch (const Error& e) {
            throw Error(files[i].second + ": " + e.what());
        }
    });

    // 2) Standardize patch features with training-set statistics.
    std::vector<FeatureVector> all_patches;
    all_patches.reserve(files.size() * n);
    for (const auto& feats : per_image)
        all_patches.insert(all_patches.end(), feats.begin(), feats.end());
    model.scaler = fit_scaler(all_patches);

    std::vector<std::vector<FeatureVector>> scaled(files.size());
    std::vector<std::vector<FeatureVector>> per_class(m);
    for (std::size_t i = 0; i < files.size(); ++i) {
        scaled[i].reserve(n);
        for (const auto& f : per_image[i]) {
            scaled[i].push_back(apply_scaler(model.scaler, f));
            per_class[files[i].first].push_back(scaled[i].back());
        }
    }
    per_image.clear();

    // 3) One GMM per class over that class's patch features.
    model.gmms.resize(m);
    parallel_for(m, threads, [&](std::size_t c) {
        try {
            model.gmms[c] =
                fit_em(per_class[c], cfg.gmm_components, sub_seed(cfg.seed, kTagGmm, c))
                    .first;
        } catch (const Error& e) {
            throw Error("class '" + model.class_names[c] + "': " + e.what());
        }
    });

    // 4) Class-preference matrix from pairwise MC-KL divergences.
    TransitionOptions topts;
    topts.n_samples = cfg.kl_samples;
    topts.seed = sub_seed(cfg.seed, kTagKl);
    topts.include_self = cfg.transition_include_self;
    model.transition = build_transition_matrix(model.gmms, topts, threads);

    // 5) Chain marginal features for every training image.
    std::vector<FeatureVector> train_features(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        train_features[i] = chain_feature(model, scaled[i]);
    });

    // 6) One-vs-all SVM over the marginal features.
    std::vector<std::size_t> labels(files.size());
    for (std::size_t i = 0; i < files.size(); ++i) labels[i] = files[i].first;
    SvmOptions sopts;
    sopts.c = cfg.svm_c;
    sopts.gamma = effective_gamma(cfg, n * m);
    sopts.tol = cfg.svm_tol;
    sopts.seed = sub_seed(cfg.seed, kTagSvm);
    model.svm = train_ova(train_features, labels, m, sopts, threads);
    return model;
}

ProbabilisticFeature featurize_image(const TrainedModel& model,
                                     const GrayImage& image) {
    auto raw = raw_patch_features(image, model.config);
    std::vector<FeatureVector> scaled;
    scaled.reserve(raw.size());
    for (const auto& f : raw) scaled.push_back(apply_scaler(model.scaler, f));
    return chain_feature(model, scaled);
}

Prediction predict(const TrainedModel& model, const GrayImage& image) {
    const ProbabilisticFeature f = featurize_image(model, image);
    Prediction p;
    p.decisions = decision_values(model.svm, f);
    p.class_index = 0;
    for (std::size_t j = 1; j < p.decisions.size(); ++j)
        if (p.decisions[j] > p.decisions[p.class_index]) p.class_index = j;
    p.class_name = model.class_names[p.class_index];
    return p;
}

EvalReport evaluate(const TrainedModel& model, const DatasetManifest& dataset,
                    unsigned threads) {
    const std::size_t m = model.class_count();
    std::vector<std::pair<std::size_t, std::string>> files;
    for (const auto& cls : dataset.classes) {
        const auto it = std::find(model.class_names.begin(),
                                  model.class_names.end(), cls.name);
        if (it == model.class_names.end())
            throw UnknownLabel("dataset class '" + cls.name +
                               "' is not known to the model");
        const std::size_t c =
            static_cast<std::size_t>(it - model.class_names.begin());
        for (const auto& f : cls.files) files.emplace_back(c, f);
    }
    if (files.empty()) throw EmptyDataset("evaluation set has no images");

    std::vector<std::size_t> predicted(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        predicted[i] = predict(model, load_image(files[i].second)).class_index;
    });

    EvalReport report;
    report.class_names = model.class_names;
    report.confusion.assign(m, std::vector<std::size_t>(m, 0));
    report.total = files.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        ++report.confusion[files[i].first][predicted[i]];
        if (predicted[i] == files[i].first) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(files.size());
    report.per_class_accuracy.assign(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t row_total = 0;
        for (std::size_t j = 0; j < m; ++j) row_total += report.confusion[c][j];
        if (row_total > 0)
            report.per_class_accuracy[c] =
                static_cast<double>(report.confusion[c][c]) /
                static_cast<double>(row_total);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

json scaler_to_json(const FeatureScaler& s) {
    return json{{"mean", s.mean}, {"std", s.std_dev}};
}

json gmm_to_json(const GmmModel& g) {
    json comps = json::array();
    for (const auto& c : g.components)
        comps.push_back(json{{"mean", c.mean}, {"var", c.var}});
    return json{{"weights", g.weights}, {"components", comps}};
}

json svm_to_json(const OneVsAllSvm& s) {
    json machines = json::array();
    for (const auto& mch : s.machines)
        machines.push_back(json{{"support_vectors", mch.support_vectors},
                                {"dual_coeffs", mch.dual_coeffs},
                                {"bias", mch.bias},
                                {"gamma", mch.gamma},
                                {"c", mch.c},
                                {"converged", mch.converged}});
    return json{{"machines", machines}};
}

json config_to_json(const TrainConfig& c) {
    return json{{"grid_side", c.grid_side},
                {"order", scan_order_name(c.order)},
                {"gmm_components", c.gmm_components},
                {"kl_samples", c.kl_samples},
                {"transition_include_self", c.transition_include_self},
                {"svm_c", c.svm_c},
                {"svm_gamma", c.svm_gamma},
                {"svm_tol", c.svm_tol},
                {"patch_size", c.patch_size},
                {"seed", c.seed}};
}

// Field access that reports the missing/mistyped path.
const json& field(const json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end())
        throw SchemaError("missing field " + path + "." + key);
    return *it;
}

template <typename T>
T field_as(const json& j, const char* key, const std::string& path) {
    try {
        return field(j, key, path).get<T>();
    } catch (const json::exception&) {
        throw SchemaError("field " + path + "." + key + " has the wrong type");
    }
}

TrainConfig config_from_json(const json& j, const std::string& path) {
    TrainConfig c;
    c.grid_side = field_as<std::size_t>(j, "grid_side", path);
    c.order = parse_scan_order(field_as<std::string>(j, "order", path));
    c.gmm_components = field_as<std::size_t>(j, "gmm_components", path);
    c.kl_samples = field_as<std::size_t>(j, "kl_samples", path);
    c.transition_include_self =
        field_as<bool>(j, "transition_include_self", path);
    c.svm_c = field_as<double>(j, "svm_c", path);
    c.svm_gamma = field_as<double>(j, "svm_gamma", path);
    c.svm_tol = field_as<double>(j, "svm_tol", path);
    c.patch_size = field_as<std::size_t>(j, "patch_size", path);
    c.seed = field_as<std::uint64_t>(j, "seed", path);
    return c;
}

} // namespace

std::string serialize_model(const TrainedModel& model) {
    json doc{{"format", "patchcrf-model"},
             {"version", TrainedModel::kVersion},
             {"config", config_to_json(model.config)},
             {"classes", model.class_names},
             {"scaler", scaler_to_json(model.scaler)},
             {"transition", model.transition.q},
             {"svm", svm_to_json(model.svm)}};
    json gmms = json::array();
    for (const auto& g : model.gmms) gmms.push_back(gmm_to_json(g));
    doc["gmms"] = std::move(gmms);
    return doc.dump(2) + "\n";
}

TrainedModel deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("model document is not valid JSON: ") +
                          e.what());
    }
    if (field_as<std::string>(doc, "format", "$") != "patchcrf-model")
        throw SchemaError("field $.format is not 'patchcrf-model'");
    const int version = field_as<int>(doc, "version", "$");
    if (version != TrainedModel::kVersion)
        throw VersionMismatch("model version " + std::to_string(version) +
                              " is not supported (expected " +
                              std::to_string(TrainedModel::kVersion) + ")");

    TrainedModel model;
    model.config = config_from_json(field(doc, "config", "$"), "$.config");
    validate_config(model.config);
    model.class_names =
        field_as<std::vector<std::string>>(doc, "classes", "$");
    if (model.class_names.empty()) throw SchemaError("field $.classes is empty");

    const json& jscaler = field(doc, "scaler", "$");
    model.scaler.mean =
        field_as<std::vector<double>>(jscaler, "mean", "$.scaler");
    model.scaler.std_dev =
        field_as<std::vector<double>>(jscaler, "std", "$.scaler");
    if (model.scaler.mean.size() != GaborBank::kFilterCount ||
        model.scaler.std_dev.size() != model.scaler.mean.size())
        throw SchemaError("field $.scaler has the wrong dimension");

    const json& jgmms = field(doc, "gmms", "$");
    if (!jgmms.is_array() || jgmms.size() != model.class_names.size())
        throw SchemaError("field $.gmms must hold one mixture per class");
    for (std::size_t c = 0; c < jgmms.size(); ++c) {
        const std::string path = "$.gmms[" + std::to_string(c) + "]";
        GmmModel g;
        g.weights = field_as<std::vector<double>>(jgmms[c], "weights", path);
        const json& jcomps = field(jgmms[c], "components", path);
        if (!jcomps.is_array() || jcomps.size() != g.weights.size())
            throw SchemaError("field " + path + ".components length mismatch");
        for (std::size_t i = 0; i < jcomps.size(); ++i) {
            const std::string cpath = path + ".components[" + std::to_string(i) + "]";
            DiagonalGaussian comp;
            comp.mean = field_as<std::vector<double>>(jcomps[i], "mean", cpath);
            comp.var = field_as<std::vector<double>>(jcomps[i], "var", cpath);
            if (comp.mean.size() != GaborBank::kFilterCount ||
                comp.var.size() != comp.mean.size())
                throw SchemaError("field " + cpath + " has the wrong dimension");
            g.components.push_back(std::move(comp));
        }
        model.gmms.push_back(std::move(g));
    }

    model.transition.q =
        field_as<std::vector<std::vector<double>>>(doc, "transition", "$");
    if (model.transition.q.size() != model.class_names.size())
        throw SchemaError("field $.transition must be m x m");
    for (const auto& row : model.transition.q)
        if (row.size() != model.class_names.size())
            throw SchemaError("field $.transition must be m x m");

    const json& jsvm = field(doc, "svm", "$");
    const json& jmachines = field(jsvm, "machines", "$.svm");
    if (!jmachines.is_array() || jmachines.size() != model.class_names.size())
        throw SchemaError("field $.svm.machines must hold one machine per class");
    const std::size_t feature_dim =
        model.patch_count() * model.class_count();
    for (std::size_t j = 0; j < jmachines.size(); ++j) {
        const std::string path = "$.svm.machines[" + std::to_string(j) + "]";
        RbfBinarySvm mch;
        mch.support_vectors =
            field_as<std::vector<FeatureVector>>(jmachines[j], "support_vectors", path);
        mch.dual_coeffs =
            field_as<std::vector<double>>(jmachines[j], "dual_coeffs", path);
        mch.bias = field_as<double>(jmachines[j], "bias", path);
        mch.gamma = field_as<double>(jmachines[j], "gamma", path);
        mch.c = field_as<double>(jmachines[j], "c", path);
        mch.converged = field_as<bool>(jmachines[j], "converged", path);
        if (mch.support_vectors.size() != mch.dual_coeffs.size())
            throw SchemaError("field " + path + " coefficient count mismatch");
        for (const auto& sv : mch.support_vectors)
            if (sv.size() != feature_dim)
                throw SchemaError("field " + path +
                                  " support vector dimension mismatch");
        model.svm.machines.push_back(std::move(mch));
    }
    return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file: " + path);
    out << serialize_model(model);
    if (!out) throw Error("failed writing model file: " + path);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return deserialize_model(text);
}

std::string serialize_report(const EvalReport& report) {
    json doc{{"accuracy", report.accuracy},
             {"classes", report.class_names},
             {"per_class_accuracy", report.per_class_accuracy},
             {"confusion", report.confusion},
             {"total", report.total}};
    return doc.dump(2) + "\n";
}

std::string serialize_feature(const TrainedModel& model,
                              const ProbabilisticFeature& feature) {
    json doc{{"n", model.patch_count()},
             {"m", model.class_count()},
             {"classes", model.class_names},
             {"values", feature}};
    return doc.dump(2) + "\n";
}

} // namespace patchcrf
