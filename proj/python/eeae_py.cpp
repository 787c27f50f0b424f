// Python bindings over the core library. Matrices cross the boundary as 2-D
// float64 numpy arrays (copied).

#include "eeae/checkpoint.hpp"
#include "eeae/experiment.hpp"
#include "eeae/gradcheck.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace eeae;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() == 1) {
        Matrix m(1, static_cast<std::size_t>(a.shape(0)));
        std::memcpy(m.flat().data(), a.data(), m.size() * sizeof(double));
        return m;
    }
    if (a.ndim() != 2) throw std::invalid_argument("expected a 1-D or 2-D array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(m.flat().data(), a.data(), m.size() * sizeof(double));
    return m;
}

Array to_array(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::memcpy(out.mutable_data(), m.flat().data(), m.size() * sizeof(double));
    return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

py::dict breakdown_dict(const LossBreakdown& l) {
    py::dict d;
    d["L_a"] = l.reconstruction;
    d["L_h1"] = l.hetero;
    d["L_h2"] = l.homo;
    d["L_h"] = l.exclusivity;
    d["L"] = l.total;
    d["lambda"] = l.lambda;
    return d;
}

py::list history_list(const std::vector<PhaseHistory>& history) {
    py::list out;
    for (const auto& phase : history) {
        for (std::size_t e = 0; e < phase.epochs.size(); ++e) {
            py::dict d = breakdown_dict(phase.epochs[e]);
            d["phase"] = phase.phase;
            d["epoch"] = e;
            out.append(d);
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_eeae, m) {
    m.doc() = "Exclusivity-enhanced stacked autoencoders";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

    m.def("omega", [](const Array& v) { return omega(to_vector(v)); });
    m.def(
        "clamped_cosine",
        [](const Array& u, const Array& h, double eps) { return clamped_cosine(to_vector(u), to_vector(h), eps); },
        py::arg("prototype"), py::arg("code"), py::arg("eps") = kNormEps);
    m.def(
        "top_m_neighbors", [](const Array& x, std::size_t j, std::size_t k) { return top_m_neighbors(to_matrix(x), j, k); },
        py::arg("data"), py::arg("j"), py::arg("m"));
    m.def(
        "exclusivity_targets",
        [](const Array& x, std::size_t k) {
            const Matrix data = to_matrix(x);
            const auto t = build_targets(build_context(data, k), data);
            return py::make_tuple(to_array(t.hetero), to_array(t.homo));
        },
        py::arg("data"), py::arg("m"), "Per-row exclude-one means and top-m neighbor means.");
    m.def(
        "exclusivity_loss",
        [](const Array& codes, const Array& hetero, const Array& homo, const std::string& sum_mode) {
            const auto l = exclusivity_loss(to_matrix(codes), to_matrix(hetero), to_matrix(homo),
                                            parse_reduction(sum_mode));
            py::dict d;
            d["L_h1"] = l.hetero;
            d["L_h2"] = l.homo;
            d["L_h"] = l.total;
            d["d_codes"] = to_array(l.d_codes);
            d["d_hetero"] = to_array(l.d_hetero);
            d["d_homo"] = to_array(l.d_homo);
            return d;
        },
        py::arg("codes"), py::arg("enc_hetero"), py::arg("enc_homo"), py::arg("sum_mode") = "batch-mean");

    m.def(
        "synth_gaussian",
        [](std::size_t classes, std::size_t dim, std::size_t per_class, double spread, std::uint64_t seed) {
            const auto d = synth_gaussian(classes, dim, per_class, spread, seed);
            return py::make_tuple(to_array(d.examples), *d.labels);
        },
        py::arg("classes") = 3, py::arg("dim") = 32, py::arg("per_class") = 100, py::arg("spread") = 0.12,
        py::arg("seed") = 0);
    m.def(
        "load_idx",
        [](const std::filesystem::path& images, const std::filesystem::path& labels) {
            const auto d = load_idx(images, labels);
            return py::make_tuple(to_array(d.examples), *d.labels);
        },
        py::arg("images"), py::arg("labels"));

    m.def(
        "knn_classify",
        [](const Array& train, const std::vector<int>& labels, const Array& query, std::size_t k,
           const std::string& metric) {
            KnnOptions o;
            o.k = k;
            o.metric = parse_metric(metric);
            return knn_classify(to_matrix(train), labels, to_matrix(query), o);
        },
        py::arg("train"), py::arg("labels"), py::arg("query"), py::arg("k") = 1, py::arg("metric") = "euclidean");
    m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& t) { return accuracy(p, t); });

    py::class_<AEModel>(m, "Model")
        .def_property_readonly("input_dim", &AEModel::input_dim)
        .def_property_readonly("latent_dim", &AEModel::latent_dim)
        .def_property_readonly("depth", [](const AEModel& a) { return a.layers().size(); })
        .def("encode", [](const AEModel& a, const Array& x) { return to_array(encode(a, to_matrix(x))); })
        .def("decode", [](const AEModel& a, const Array& h) { return to_array(decode(a, to_matrix(h))); })
        .def("save",
             [](const AEModel& a, const std::filesystem::path& path, const std::vector<double>& snapshots) {
                 save_checkpoint({a, snapshots, ""}, path);
             },
             py::arg("path"), py::arg("snapshots") = std::vector<double>{});
    m.def("load_model", [](const std::filesystem::path& path) { return load_checkpoint(path).model; });

    m.def(
        "train_stack",
        [](const Array& data, const std::string& config_json, std::uint64_t seed, bool finetune) {
            const auto cfg = parse_config(config_json);
            const Matrix x = to_matrix(data);
            const auto sc = cfg.stack_config(x.cols(), seed);
            std::vector<PhaseHistory> history;
            auto stacked = train_stack(sc, x, &history);
            if (finetune) stacked = fine_tune(std::move(stacked), x, sc, nullptr, &history);
            return py::make_tuple(stacked.assembled, stacked.snapshots, history_list(history));
        },
        py::arg("data"), py::arg("config_json") = "{}", py::arg("seed") = 0, py::arg("finetune") = true,
        "Pretrain and optionally fine-tune a stack. Returns (model, snapshots, history).");

    m.def(
        "run_experiment",
        [](const std::string& config_json, bool write_files) {
            const auto result = run_experiment(parse_config(config_json), write_files);
            py::dict d;
            py::list acc;
            for (const auto& r : result.records) {
                if (r.accuracy) acc.append(*r.accuracy);
                else acc.append(py::none());
            }
            d["accuracies"] = acc;
            d["mean"] = result.summary.mean;
            d["stddev"] = result.summary.stddev;
            d["completed"] = result.summary.completed;
            d["partial"] = result.summary.partial;
            d["metrics_csv"] = metrics_csv(result.records);
            return d;
        },
        py::arg("config_json"), py::arg("write_files") = false);

    m.def(
        "gradcheck",
        [](std::size_t configs, std::uint64_t seed) {
            double worst = 0.0;
            for (const auto& c : run_gradcheck_suite(configs, seed)) worst = std::max(worst, c.max_relative_error);
            return worst;
        },
        py::arg("configs") = 20, py::arg("seed") = 1, "Largest relative gradient error over the random suite.");
}
