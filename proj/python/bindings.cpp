// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the core operations: equalization, Gabor extraction,
// PCA, whitening/tanh fusion, template matching and ROC sweeps. Images are
// 2D uint8/uint16 arrays, feature vectors are 1D float64 arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biofuse/enhance.hpp"
#include "biofuse/evaluate.hpp"
#include "biofuse/fusion.hpp"
#include "biofuse/gabor.hpp"
#include "biofuse/matching.hpp"
#include "biofuse/pca.hpp"
#include "biofuse/serialize.hpp"

namespace py = pybind11;
using namespace biofuse;

namespace {

GrayImage image_from_array(const py::array& arr, int levels) {
    if (arr.ndim() != 2) throw DataError("image array must be 2-D");
    const int h = static_cast<int>(arr.shape(0));
    const int w = static_cast<int>(arr.shape(1));
    std::vector<std::uint16_t> pixels(static_cast<std::size_t>(w) * h);
    if (py::isinstance<py::array_t<std::uint8_t>>(arr)) {
        const auto a = arr.cast<py::array_t<std::uint8_t>>().unchecked<2>();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) pixels[static_cast<std::size_t>(y) * w + x] = a(y, x);
        if (levels == 0) levels = 256;
    } else if (py::isinstance<py::array_t<std::uint16_t>>(arr)) {
        const auto a = arr.cast<py::array_t<std::uint16_t>>().unchecked<2>();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) pixels[static_cast<std::size_t>(y) * w + x] = a(y, x);
        if (levels == 0) levels = 65536;
    } else {
        throw DataError("image array must be uint8 or uint16");
    }
    return GrayImage::create(w, h, levels, std::move(pixels));
}

py::array image_to_array(const GrayImage& img) {
    if (img.levels <= 256) {
        py::array_t<std::uint8_t> out({img.height, img.width});
        auto a = out.mutable_unchecked<2>();
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) a(y, x) = static_cast<std::uint8_t>(img.at(x, y));
        return out;
    }
    py::array_t<std::uint16_t> out({img.height, img.width});
    auto a = out.mutable_unchecked<2>();
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) a(y, x) = img.at(x, y);
    return out;
}

std::vector<double> vector_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 1) throw DataError("feature vector must be 1-D");
    return std::vector<double>(arr.data(), arr.data() + arr.shape(0));
}

py::array_t<double> vector_to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> matrix_to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data(), m.data() + static_cast<std::size_t>(m.rows()) * m.cols(),
              out.mutable_data());
    return out;
}

FeatureVector feature_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
                                 const std::string& modality) {
    FeatureVector v;
    v.modality = modality_from_string(modality);
    v.values = vector_from_array(arr);
    return v;
}

std::vector<FeatureVector> features_from_matrix(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
    const std::string& modality) {
    if (arr.ndim() != 2) throw DataError("sample matrix must be 2-D (rows are samples)");
    const auto a = arr.unchecked<2>();
    std::vector<FeatureVector> samples(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        samples[i].modality = modality_from_string(modality);
        samples[i].values.resize(a.shape(1));
        for (py::ssize_t j = 0; j < a.shape(1); ++j) samples[i].values[j] = a(i, j);
    }
    return samples;
}

BankSpec bank_from_kwargs(int scales, int orientations, double lambda0, double lambda_ratio,
                          double sigma_over_lambda, double gamma, int kernel_radius_cap) {
    BankSpec spec;
    spec.scales = scales;
    spec.orientations = orientations;
    spec.lambda0 = lambda0;
    spec.lambda_ratio = lambda_ratio;
    spec.sigma_over_lambda = sigma_over_lambda;
    spec.gamma = gamma;
    spec.kernel_radius_cap = kernel_radius_cap;
    return spec;
}

} // namespace

PYBIND11_MODULE(_biofuse, m) {
    m.doc() = "bimodal biometric feature extraction and fusion";
    m.attr("__version__") = "1.0.0";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<IoError>(m, "IoError");

    m.def(
        "equalize",
        [](const py::array& img, int levels) {
            return image_to_array(equalize(image_from_array(img, levels)));
        },
        py::arg("image"), py::arg("levels") = 0,
        "Histogram-equalize a 2-D uint8/uint16 image (levels defaults to the dtype range).");

    m.def(
        "gabor_kernel",
        [](double lambda, double theta, double phi, double sigma, double gamma, int radius) {
            return matrix_to_array(
                gabor_kernel(GaborParams::create(lambda, theta, phi, sigma, gamma), radius));
        },
        py::arg("lambda_"), py::arg("theta"), py::arg("phi"), py::arg("sigma"), py::arg("gamma"),
        py::arg("radius"), "Sample one Gabor kernel on [-radius, radius]^2.");

    m.def(
        "extract_features",
        [](const py::array& img, int levels, int factor, const std::string& modality, int scales,
           int orientations, double lambda0, double lambda_ratio, double sigma_over_lambda,
           double gamma, int kernel_radius_cap) {
            const GrayImage gi = image_from_array(img, levels);
            const FilterBank bank = build_bank(bank_from_kwargs(
                scales, orientations, lambda0, lambda_ratio, sigma_over_lambda, gamma,
                kernel_radius_cap));
            return vector_to_array(
                extract_features(gi, bank, factor, modality_from_string(modality)).values);
        },
        py::arg("image"), py::arg("levels") = 0, py::arg("factor") = 64,
        py::arg("modality") = "face", py::arg("scales") = 5, py::arg("orientations") = 8,
        py::arg("lambda0") = 4.0, py::arg("lambda_ratio") = 1.4142135623730951,
        py::arg("sigma_over_lambda") = 0.56, py::arg("gamma") = 0.5,
        py::arg("kernel_radius_cap") = 15,
        "Downsampled, per-filter z-scored Gabor magnitude features of one image.");

    py::class_<PcaModel>(m, "PcaModel")
        .def_property_readonly("mean", [](const PcaModel& p) { return vector_to_array(p.mean); })
        .def_property_readonly("basis",
                               [](const PcaModel& p) { return matrix_to_array(p.basis); })
        .def_property_readonly(
            "eigenvalues", [](const PcaModel& p) { return vector_to_array(p.eigenvalues); })
        .def_readonly("total_variance", &PcaModel::total_variance)
        .def_property_readonly("dim", &PcaModel::dim)
        .def_property_readonly("components", &PcaModel::components)
        .def(
            "project",
            [](const PcaModel& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
               const std::string& modality) {
                return vector_to_array(project(p, feature_from_array(v, modality)).values);
            },
            py::arg("v"), py::arg("modality") = "face");

    m.def(
        "fit_pca",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
           int components, double variance_fraction, const std::string& modality) {
            return fit_pca(features_from_matrix(samples, modality),
                           PcaTarget{components, variance_fraction});
        },
        py::arg("samples"), py::arg("components") = 0, py::arg("variance_fraction") = 0.95,
        py::arg("modality") = "face",
        "Fit PCA over rows of a sample matrix (snapshot method when n < d).");

    m.def(
        "fit_whitening",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
           double sigma_floor, const std::string& modality) {
            const WhiteningStats stats =
                fit_whitening(features_from_matrix(samples, modality), sigma_floor);
            return py::make_tuple(vector_to_array(stats.mu), vector_to_array(stats.sigma));
        },
        py::arg("samples"), py::arg("sigma_floor") = 1e-8, py::arg("modality") = "face",
        "Componentwise (mean, floored std-dev) over sample rows.");

    m.def(
        "whiten",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& mu,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& sigma,
           const std::string& modality) {
            WhiteningStats stats;
            stats.modality = modality_from_string(modality);
            stats.mu = vector_from_array(mu);
            stats.sigma = vector_from_array(sigma);
            return vector_to_array(whiten(feature_from_array(v, modality), stats).values);
        },
        py::arg("v"), py::arg("mu"), py::arg("sigma"), py::arg("modality") = "face");

    m.def(
        "mahalanobis_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& mu,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& sigma,
           const std::string& modality) {
            WhiteningStats stats;
            stats.modality = modality_from_string(modality);
            stats.mu = vector_from_array(mu);
            stats.sigma = vector_from_array(sigma);
            return mahalanobis_distance(feature_from_array(v, modality), stats);
        },
        py::arg("v"), py::arg("mu"), py::arg("sigma"), py::arg("modality") = "face",
        "Euclidean norm of the whitened vector.");

    m.def(
        "tanh_normalize",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v, double c,
           const std::string& modality) {
            return vector_to_array(tanh_normalize(feature_from_array(v, modality), c).values);
        },
        py::arg("v"), py::arg("c") = 0.01, py::arg("modality") = "face",
        "Map components into (0,1) via (tanh(c*x)+1)/2.");

    m.def(
        "fuse",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& face,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& fingerprint) {
            return vector_to_array(fuse(feature_from_array(face, "face"),
                                        feature_from_array(fingerprint, "fingerprint"))
                                       .values);
        },
        py::arg("face"), py::arg("fingerprint"),
        "Average-sum fusion of two normalized vectors of equal dimension.");

    py::class_<TemplateStore>(m, "TemplateStore")
        .def(py::init([](const std::string& metric) {
                 return TemplateStore(metric_from_string(metric));
             }),
             py::arg("metric") = "euclidean")
        .def(
            "enroll",
            [](TemplateStore& store, const std::string& subject,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
               const std::string& modality) {
                store.enroll(subject, feature_from_array(v, modality));
            },
            py::arg("subject"), py::arg("v"), py::arg("modality") = "face")
        .def(
            "identify",
            [](const TemplateStore& store,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
               const std::string& modality) {
                std::vector<std::pair<std::string, double>> out;
                for (const MatchResult& r : store.identify(feature_from_array(v, modality)))
                    out.emplace_back(r.subject, r.distance);
                return out;
            },
            py::arg("v"), py::arg("modality") = "face",
            "All (subject, distance) pairs, ascending by distance.")
        .def(
            "classify",
            [](const TemplateStore& store,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& v, int k,
               const std::string& modality) {
                return store.classify(feature_from_array(v, modality), k);
            },
            py::arg("v"), py::arg("k") = 1, py::arg("modality") = "face")
        .def(
            "verify",
            [](const TemplateStore& store, const std::string& subject,
               const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
               double threshold, const std::string& modality) {
                const VerifyResult r =
                    store.verify(subject, feature_from_array(v, modality), threshold);
                return py::make_tuple(r.accepted, r.score);
            },
            py::arg("subject"), py::arg("v"), py::arg("threshold"), py::arg("modality") = "face")
        .def("save", [](const TemplateStore& store,
                        const std::string& path) { save_store(store, path); })
        .def_static("load", [](const std::string& path) { return load_store(path); })
        .def("__len__", &TemplateStore::size);

    m.def(
        "roc_sweep",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& genuine,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& impostor) {
            std::vector<std::tuple<double, double, double>> out;
            for (const RocPoint& p : roc_sweep(vector_from_array(genuine),
                                               vector_from_array(impostor)))
                out.emplace_back(p.threshold, p.far, p.frr);
            return out;
        },
        py::arg("genuine"), py::arg("impostor"),
        "(threshold, FAR, FRR) triples over the unique score thresholds.");

    m.def(
        "equal_error_rate",
        [](const std::vector<std::tuple<double, double, double>>& roc) {
            std::vector<RocPoint> points;
            points.reserve(roc.size());
            for (const auto& [t, far, frr] : roc) points.push_back({t, far, frr});
            return equal_error_rate(points);
        },
        py::arg("roc"));
}
