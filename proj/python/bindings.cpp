// Python surface over the core library: transforms, masking, the synthetic
// generator, training, evaluation, and saliency. Spectra cross the boundary
// as (record_id, channels) pairs; label joins happen internally so the
// pointer-based pairing never leaks into python.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxrf/evaluate.hpp"
#include "maxrf/saliency.hpp"
#include "maxrf/synthetic.hpp"

namespace py = pybind11;
using namespace maxrf;

namespace {

std::vector<LabeledSpectrum> make_pairs(const std::vector<Spectrum>& spectra,
                                        const std::vector<GeochemLabel>& labels,
                                        Task task) {
  return align_labels(spectra, labels, task);
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "masked-autoencoder pipeline for XRF core-scanning spectra";

  py::enum_<Task>(m, "Task")
      .value("CaCO3", Task::CaCO3)
      .value("TOC", Task::TOC);
  py::enum_<TransformKind>(m, "TransformKind")
      .value("InstanceNorm", TransformKind::InstanceNorm)
      .value("ChannelNorm", TransformKind::ChannelNorm)
      .value("LogTransform", TransformKind::LogTransform);

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init<>())
      .def_readwrite("record_id", &Spectrum::record_id)
      .def_readwrite("core_id", &Spectrum::core_id)
      .def_readwrite("depth_cm", &Spectrum::depth_cm)
      .def_readwrite("channels", &Spectrum::channels);

  py::class_<GeochemLabel>(m, "GeochemLabel")
      .def(py::init<>())
      .def_readwrite("record_id", &GeochemLabel::record_id)
      .def_readwrite("task", &GeochemLabel::task)
      .def_readwrite("value_wt_pct", &GeochemLabel::value_wt_pct);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("n_channels", &ModelConfig::n_channels)
      .def_readwrite("patch_size", &ModelConfig::patch_size)
      .def_readwrite("embed_dim", &ModelConfig::embed_dim)
      .def_readwrite("encoder_depth", &ModelConfig::encoder_depth)
      .def_readwrite("encoder_heads", &ModelConfig::encoder_heads)
      .def_readwrite("decoder_dim", &ModelConfig::decoder_dim)
      .def_readwrite("decoder_depth", &ModelConfig::decoder_depth)
      .def_readwrite("decoder_heads", &ModelConfig::decoder_heads)
      .def_readwrite("mlp_ratio", &ModelConfig::mlp_ratio)
      .def("n_patches", &ModelConfig::n_patches)
      .def("validate", &ModelConfig::validate);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("base_lr", &TrainConfig::base_lr)
      .def_readwrite("warmup_epochs", &TrainConfig::warmup_epochs)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("mask_ratio", &TrainConfig::mask_ratio)
      .def("validate", &TrainConfig::validate);

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("n_channels", &SyntheticConfig::n_channels)
      .def_readwrite("min_peaks", &SyntheticConfig::min_peaks)
      .def_readwrite("max_peaks", &SyntheticConfig::max_peaks)
      .def_readwrite("min_sigma", &SyntheticConfig::min_sigma)
      .def_readwrite("max_sigma", &SyntheticConfig::max_sigma)
      .def_readwrite("min_amp", &SyntheticConfig::min_amp)
      .def_readwrite("max_amp", &SyntheticConfig::max_amp)
      .def_readwrite("noise_std", &SyntheticConfig::noise_std)
      .def_readwrite("target_peak_center", &SyntheticConfig::target_peak_center)
      .def_readwrite("target_peak_sigma", &SyntheticConfig::target_peak_sigma)
      .def_readwrite("target_amp_min", &SyntheticConfig::target_amp_min)
      .def_readwrite("target_amp_max", &SyntheticConfig::target_amp_max)
      .def_readwrite("exclusion_channels", &SyntheticConfig::exclusion_channels)
      .def_readwrite("target_jitter_channels",
                     &SyntheticConfig::target_jitter_channels);

  py::class_<MaskPlan>(m, "MaskPlan")
      .def_readonly("n_patches", &MaskPlan::n_patches)
      .def_readonly("mask_ratio", &MaskPlan::mask_ratio)
      .def_readonly("masked_indices", &MaskPlan::masked_indices)
      .def_readonly("kept_indices", &MaskPlan::kept_indices)
      .def_readonly("seed", &MaskPlan::seed);

  py::class_<MetricRow>(m, "MetricRow")
      .def_readonly("epoch", &MetricRow::epoch)
      .def_readonly("split", &MetricRow::split)
      .def_readonly("loss", &MetricRow::loss)
      .def_readonly("lr", &MetricRow::lr);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def_readonly("format_version", &Checkpoint::format_version)
      .def_readonly("model", &Checkpoint::model)
      .def_readonly("task", &Checkpoint::task)
      .def_readonly("epoch", &Checkpoint::epoch)
      .def_readonly("seed", &Checkpoint::seed)
      .def_readonly("metrics", &Checkpoint::metrics)
      .def("parameter_count",
           [](const Checkpoint& c) { return parameter_count(c.params); });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("task", &EvalReport::task)
      .def_readonly("split_name", &EvalReport::split_name)
      .def_readonly("n", &EvalReport::n)
      .def_readonly("r2", &EvalReport::r2)
      .def_readonly("rmse", &EvalReport::rmse);

  py::class_<SaliencyMap>(m, "SaliencyMap")
      .def_property_readonly("values",
                             [](const SaliencyMap& s) { return to_array(s.values); })
      .def_property_readonly(
          "energy_axis_kev",
          [](const SaliencyMap& s) { return to_array(s.energy_axis_kev); })
      .def_readonly("batch_size", &SaliencyMap::batch_size)
      .def_readonly("task", &SaliencyMap::task);

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  // transforms
  m.def("instance_normalize",
        [](const std::vector<double>& x) { return to_array(instance_normalize(x)); });
  m.def("log_transform",
        [](const std::vector<double>& x) { return to_array(log_transform(x)); });

  // masking
  m.def("sample_mask", &sample_mask, py::arg("n_patches"), py::arg("mask_ratio"),
        py::arg("seed"));

  // io
  m.def("load_spectra", &load_spectra, py::arg("path"), py::arg("n_channels") = 2048);
  m.def("save_spectra", &save_spectra);
  m.def("load_labels", &load_labels);
  m.def("save_labels", &save_labels);
  m.def("load_checkpoint", &load_checkpoint);
  m.def("save_checkpoint", &save_checkpoint);

  // synthetic corpus
  m.def("synth_spectra", &synth_spectra, py::arg("n"), py::arg("seed"),
        py::arg("cfg") = SyntheticConfig{});
  m.def("synth_labels", &synth_labels, py::arg("n"), py::arg("seed"),
        py::arg("task"), py::arg("cfg") = SyntheticConfig{});

  // training
  m.def(
      "pretrain",
      [](const std::vector<Spectrum>& train, const std::vector<Spectrum>& val,
         const ModelConfig& mcfg, const TrainConfig& tcfg, TransformKind kind) {
        const auto r = pretrain(train, val, mcfg, tcfg, kind);
        return py::make_tuple(r.best, r.final, r.metrics);
      },
      py::arg("train"), py::arg("val"), py::arg("model"), py::arg("config"),
      py::arg("transform") = TransformKind::InstanceNorm,
      "Returns (best_checkpoint, final_checkpoint, metrics).");
  m.def(
      "finetune",
      [](const Checkpoint* pre, const std::vector<Spectrum>& spectra,
         const std::vector<GeochemLabel>& labels,
         const std::vector<Spectrum>& val_spectra,
         const std::vector<GeochemLabel>& val_labels, Task task,
         const ModelConfig& mcfg, const TrainConfig& tcfg, long subsample_n,
         TransformKind kind) {
        const auto pairs = make_pairs(spectra, labels, task);
        const auto val_pairs = make_pairs(val_spectra, val_labels, task);
        const auto r = finetune(pre, pairs, val_pairs, task, mcfg, tcfg,
                                subsample_n, kind);
        return py::make_tuple(r.best, r.final, r.metrics);
      },
      py::arg("pretrained").none(true), py::arg("spectra"), py::arg("labels"),
      py::arg("val_spectra"), py::arg("val_labels"), py::arg("task"),
      py::arg("model"), py::arg("config"), py::arg("subsample_n") = -1,
      py::arg("transform") = TransformKind::InstanceNorm,
      "Returns (best_checkpoint, final_checkpoint, metrics).");

  // evaluation
  m.def(
      "evaluate_regression",
      [](const Checkpoint& ckpt, const std::vector<Spectrum>& spectra,
         const std::vector<GeochemLabel>& labels, Task task,
         const std::string& split_name) {
        return evaluate_regression(ckpt, make_pairs(spectra, labels, task), task,
                                   split_name);
      },
      py::arg("ckpt"), py::arg("spectra"), py::arg("labels"), py::arg("task"),
      py::arg("split_name") = "val");
  m.def("evaluate_reconstruction", &evaluate_reconstruction, py::arg("ckpt"),
        py::arg("spectra"), py::arg("mask_ratio"), py::arg("seed"));
  m.def("r_squared", [](const std::vector<double>& truth,
                        const std::vector<double>& pred) {
    return r_squared(truth, pred);
  });

  // saliency
  m.def(
      "saliency_map",
      [](const Checkpoint& ckpt, const std::vector<Spectrum>& spectra,
         const std::vector<GeochemLabel>& labels, Task task) {
        return saliency_map(ckpt, make_pairs(spectra, labels, task), task);
      },
      py::arg("ckpt"), py::arg("spectra"), py::arg("labels"), py::arg("task"));
  m.def("channel_to_energy", &channel_to_energy, py::arg("channel_index"),
        py::arg("n_channels") = 2048);
}
