#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <limits>

#include "codex/acquisition.hpp"
#include "codex/baselines.hpp"
#include "codex/errors.hpp"
#include "codex/experiment.hpp"
#include "codex/metrics.hpp"
#include "codex/phantom.hpp"
#include "codex/sampling.hpp"

namespace py = pybind11;
using namespace codex;

namespace {

using NdArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array2D from_numpy(const NdArray& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    Array2D out(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::memcpy(out.vec().data(), a.data(), out.size() * sizeof(double));
    return out;
}

NdArray to_numpy(const Array2D& a) {
    NdArray out({a.rows(), a.cols()});
    std::memcpy(out.mutable_data(), a.vec().data(), a.size() * sizeof(double));
    return out;
}

}  // namespace

PYBIND11_MODULE(_codex, m) {
    m.doc() = "Coded-exposure CT simulation and reconstruction";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SamplingPlan>(m, "SamplingPlan")
        .def_readonly("K", &SamplingPlan::K)
        .def_readonly("m", &SamplingPlan::m)
        .def_readonly("n", &SamplingPlan::n)
        .def_readonly("N_theta", &SamplingPlan::N_theta)
        .def_readonly("M_theta", &SamplingPlan::M_theta)
        .def_readonly("gcd_K_N", &SamplingPlan::gcd_K_N)
        .def_readonly("view_angles_rad", &SamplingPlan::view_angles_rad)
        .def_property_readonly("blur_angle_deg", &SamplingPlan::blur_angle_deg)
        .def_property_readonly("span_deg", &SamplingPlan::span_deg)
        .def("micro_angles_rad", &SamplingPlan::micro_angles_rad)
        .def("nominal_view_angles_rad", &SamplingPlan::nominal_view_angles_rad)
        .def("__repr__", [](const SamplingPlan& p) {
            return "SamplingPlan(K=" + std::to_string(p.K) + ", N_theta=" + std::to_string(p.N_theta) +
                   ", M_theta=" + std::to_string(p.M_theta) + ")";
        });
    m.def("make_sampling_plan", &make_sampling_plan, py::arg("K"), py::arg("m"), py::arg("n"), py::arg("M_theta"));
    m.def("plan_for_n_theta", &plan_for_n_theta, py::arg("K"), py::arg("N_theta"), py::arg("M_theta"));
    m.def("angles_unique", [](const SamplingPlan& p) { return check_unique_angles(p).unique; });

    m.def(
        "exposure_code",
        [](const std::string& kind, int K, const std::string& bits) {
            const ExposureCode c = CodeSpec{kind, bits}.build(K);
            return std::vector<int>(c.bits.begin(), c.bits.end());
        },
        py::arg("kind"), py::arg("K"), py::arg("bits") = "");

    m.def("apply_C",
          [](const SamplingPlan& p, const std::string& kind, const NdArray& micro) {
              return to_numpy(apply_C(p, CodeSpec{kind, ""}.build(p.K), from_numpy(micro)));
          });

    m.def(
        "phantom",
        [](const std::string& kind, int n_side, std::uint64_t seed) {
            PhantomSpec s;
            s.kind = parse_phantom_kind(kind);
            s.n_side = n_side;
            s.seed = seed;
            return to_numpy(make_phantom(s));
        },
        py::arg("kind") = "blobs", py::arg("n_side") = 64, py::arg("seed") = 0);

    m.def("nrmse", [](const NdArray& x, const NdArray& ref) { return nrmse(from_numpy(x), from_numpy(ref)); });
    m.def("rmse", [](const NdArray& x, const NdArray& ref) { return rmse(from_numpy(x), from_numpy(ref)); });

    m.def("validate_config", [](const std::string& text) { return serialize_config(parse_config(text)); });
    m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });

    m.def(
        "simulate",
        [](const std::string& config_json) {
            const ExperimentConfig c = parse_config(config_json);
            SimulationOutput s;
            {
                py::gil_scoped_release release;
                s = simulate(c);
            }
            py::dict d;
            d["phantom"] = to_numpy(s.phantom);
            d["counts"] = to_numpy(s.counts.values);
            d["y"] = to_numpy(s.projections.y);
            return d;
        },
        py::arg("config_json"));

    m.def(
        "reconstruct",
        [](const std::string& config_json, const NdArray& y) {
            const ExperimentConfig c = parse_config(config_json);
            const Array2D yy = from_numpy(y);
            ReconstructionOutput r;
            {
                py::gil_scoped_release release;
                r = reconstruct(c, yy);
            }
            std::vector<std::tuple<int, double, double>> hist;
            for (const auto& h : r.residuals) hist.emplace_back(h.iteration, h.primal, h.dual);
            py::dict d;
            d["image"] = to_numpy(r.image);
            d["residuals"] = hist;
            return d;
        },
        py::arg("config_json"), py::arg("y"));
}
