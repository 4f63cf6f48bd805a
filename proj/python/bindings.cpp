// Python bindings for the distillation pipeline. Vector-level operations are
// exposed directly (lists and numpy arrays in, scalars and arrays out); the
// scene-level pipeline is exposed through the same JSON documents the CLI
// reads and writes, so python callers and the command line stay byte-for-byte
// interchangeable.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "igd/bev.hpp"
#include "igd/depth.hpp"
#include "igd/fit.hpp"
#include "igd/gradcheck.hpp"
#include "igd/metrics.hpp"
#include "igd/serialize.hpp"
#include "igd/synthetic.hpp"

namespace py = pybind11;

namespace {

double expected_depth_of(const std::vector<double>& probs, const igd::DepthBinSpec& spec) {
    igd::CategoricalDepthMap map;
    map.height = 1;
    map.width = 1;
    map.bins = static_cast<int>(probs.size());
    map.probs = probs;
    return igd::expected_depth(map, spec, {{0, 0}})[0];
}

py::dict metrics_dict(const igd::DepthMetricReport& m) {
    py::dict d;
    d["rmse"] = m.rmse;
    d["rmse_log"] = m.rmse_log;
    d["abs_rel"] = m.abs_rel;
    d["sq_rel"] = m.sq_rel;
    d["log10"] = m.log10;
    d["silog"] = m.silog;
    d["delta1"] = m.delta1;
    d["delta2"] = m.delta2;
    d["delta3"] = m.delta3;
    d["n"] = m.n;
    return d;
}

igd::SceneDoc parse_scene(const std::string& text) {
    return igd::scene_doc_from_json(igd::parse_text(text));
}

igd::FitConfig parse_config(const std::string& text) {
    if (text.empty()) return igd::FitConfig{};
    return igd::fit_config_from_json(igd::parse_text(text));
}

igd::StudentState state_for(const igd::SceneDoc& doc, const std::string& student_text,
                            const igd::FitConfig& cfg) {
    if (student_text.empty()) {
        return igd::init_student_state(doc.scene, doc.spec, igd::InitMode::Uniform,
                                       cfg.init_noise_amplitude);
    }
    return igd::student_state_from_json(igd::parse_text(student_text));
}

}  // namespace

PYBIND11_MODULE(_igd, m) {
    m.doc() = "Inner-geometry distillation: depth and BEV feature losses, synthetic scenes, "
              "gradient-descent fitting";

    py::class_<igd::DepthBinSpec>(m, "DepthBinSpec")
        .def(py::init([](int bins, double min_depth, double max_depth) {
                 igd::DepthBinSpec s{bins, min_depth, max_depth};
                 s.validate();
                 return s;
             }),
             py::arg("bins"), py::arg("min_depth"), py::arg("max_depth"))
        .def_readonly("bins", &igd::DepthBinSpec::bins)
        .def_readonly("min_depth", &igd::DepthBinSpec::min_depth)
        .def_readonly("max_depth", &igd::DepthBinSpec::max_depth)
        .def("bin_width", &igd::DepthBinSpec::bin_width)
        .def("center", &igd::DepthBinSpec::center, py::arg("k"));

    m.def("expected_depth", &expected_depth_of, py::arg("probs"), py::arg("spec"),
          "Expectation of the bin centers under one categorical distribution");
    m.def("select_reference", &igd::select_reference, py::arg("pred"), py::arg("gt"),
          "Index minimizing |gt - pred|; ties go to the lowest index");
    m.def("inner_depth_residuals", &igd::inner_depth_residuals, py::arg("pred"), py::arg("gt"),
          py::arg("reference"),
          "Per-pixel (pred, gt) depth offsets relative to the reference entry");

    m.def("gram_inter_channel", &igd::gram_inter_channel, py::arg("features"),
          "Channel-by-channel Gram matrix f^T f of one keypoint feature block");
    m.def("gram_inter_keypoint", &igd::gram_inter_keypoint, py::arg("features"),
          "Keypoint-by-keypoint Gram matrix f f^T of one keypoint feature block");
    m.def("inter_channel_loss", &igd::inter_channel_loss, py::arg("student"), py::arg("teacher"),
          "Mean squared Frobenius gap between channel Grams, averaged over targets");
    m.def("inter_keypoint_loss", &igd::inter_keypoint_loss, py::arg("student"), py::arg("teacher"),
          "Mean squared Frobenius gap between keypoint Grams, averaged over targets");

    m.def(
        "depth_metrics",
        [](const std::vector<double>& pred, const std::vector<double>& gt) {
            return metrics_dict(igd::depth_metrics(pred, gt));
        },
        py::arg("pred"), py::arg("gt"),
        "Standard depth error suite (rmse, abs_rel, silog, delta thresholds, ...)");

    m.def(
        "default_spec_text", [] { return igd::to_text(igd::to_json(igd::SceneSpec{})); },
        "Default scene spec as JSON text; edit fields and pass to gen_scene_text");
    m.def(
        "default_fit_config_text", [] { return igd::to_text(igd::to_json(igd::FitConfig{})); },
        "Default fit configuration as JSON text");
    m.def(
        "gen_scene_text",
        [](const std::string& spec_text) {
            const igd::SceneSpec spec = igd::scene_spec_from_json(igd::parse_text(spec_text));
            return igd::to_text(igd::to_json(igd::SceneDoc{spec, igd::gen_scene(spec)}));
        },
        py::arg("spec_text"), "Generates the scene a spec describes; returns a scene document");
    m.def(
        "init_student_text",
        [](const std::string& scene_text, const std::string& mode, double amplitude) {
            const igd::SceneDoc doc = parse_scene(scene_text);
            return igd::to_text(igd::to_json(
                igd::init_student_state(doc.scene, doc.spec, igd::parse_init_mode(mode), amplitude)));
        },
        py::arg("scene_text"), py::arg("mode") = "uniform", py::arg("amplitude") = 0.1,
        "Initial student state for a scene; mode is uniform, noisy-teacher or random");
    m.def(
        "eval_losses_text",
        [](const std::string& scene_text, const std::string& student_text,
           const std::string& config_text) {
            const igd::SceneDoc doc = parse_scene(scene_text);
            const igd::FitConfig cfg = parse_config(config_text);
            const igd::StudentState state = state_for(doc, student_text, cfg);
            const igd::SceneBindings bindings =
                igd::bind_scene(doc.scene, doc.spec, cfg.normalize_keypoints);
            return igd::to_text(
                igd::to_json(igd::eval_losses(doc.scene, doc.spec, bindings, state, cfg.weights)));
        },
        py::arg("scene_text"), py::arg("student_text") = "", py::arg("config_text") = "",
        "All loss terms for one student state; empty student means uniform init");
    m.def(
        "distill_fit_text",
        [](const std::string& scene_text, const std::string& config_text) {
            const igd::SceneDoc doc = parse_scene(scene_text);
            const igd::FitConfig cfg = parse_config(config_text);
            return igd::to_text(igd::to_json(igd::distill_fit(doc.scene, doc.spec, cfg)));
        },
        py::arg("scene_text"), py::arg("config_text") = "",
        "Runs gradient descent on a scene; returns the fit trace");
    m.def(
        "gradcheck",
        [](std::uint64_t seed, int instances, int coords, double epsilon) {
            py::list rows;
            for (const igd::GradCheckRow& r : igd::gradcheck_suite(seed, instances, coords, epsilon)) {
                py::dict d;
                d["loss"] = igd::to_string(r.kind);
                d["instances"] = r.instances;
                d["coords_per_instance"] = r.coords_per_instance;
                d["max_rel_error"] = r.max_rel_error;
                rows.append(d);
            }
            return rows;
        },
        py::arg("seed") = 7, py::arg("instances") = 5, py::arg("coords") = 30,
        py::arg("epsilon") = 1e-5,
        "Central-difference check of every analytical gradient; one row per loss");
}
