#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "metric_lab/certify.hpp"
#include "metric_lab/errors.hpp"
#include "metric_lab/io.hpp"
#include "metric_lab/kernel.hpp"
#include "metric_lab/norms.hpp"
#include "metric_lab/operators.hpp"
#include "metric_lab/runner.hpp"
#include "metric_lab/verify.hpp"

namespace py = pybind11;
using namespace metric_lab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

ScalarField field(const Space& s, const Array& values) {
  if (static_cast<std::size_t>(values.size()) != s.size())
    throw SizeError("field has " + std::to_string(values.size()) + " values, space has " +
                    std::to_string(s.size()) + " points");
  return ScalarField(s, to_vector(values));
}

py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

YoungFunction young(const std::string& kind, double p, double cap) {
  if (kind == "power") return YoungFunction::power(p);
  if (kind == "power-log") return YoungFunction::power_log(p);
  if (kind == "capped") return YoungFunction::power_capped(p, cap);
  throw ArgumentError("unknown Young function \"" + kind + "\"");
}

WeightMode weight_mode(const std::string& name) {
  if (name == "cell-volume") return WeightMode::cell_volume;
  if (name == "uniform") return WeightMode::uniform_total_one;
  throw ArgumentError("weights must be cell-volume or uniform");
}

py::dict certificate_dict(const Space& s, const AhlforsCertificate& c) {
  const auto cond = theorem1_condition(c);
  py::dict d;
  d["nu_hat"] = c.nu_hat;
  d["c1"] = c.c1_hat;
  d["c2"] = c.c2_hat;
  d["r_min"] = c.r_min;
  d["r_max"] = c.r_max;
  d["samples"] = c.sample_count;
  d["interior_only"] = c.interior_only;
  d["condition_value"] = cond.value;
  d["condition_holds"] = cond.holds;
  d["sound"] = certificate_sound(s, c);
  return d;
}

PointwiseParams pointwise(double s, double p, double q) { return {s, p, q}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite metric measure spaces, rough singular integrals and Morrey-type bounds.";

  const py::object base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  const auto value_error = py::make_tuple(base, py::handle(PyExc_ValueError));
  py::register_exception<ArgumentError>(m, "ArgumentError", value_error);
  py::register_exception<SizeError>(m, "SizeError", value_error);
  py::register_exception<ConfigError>(m, "ConfigError", value_error);
  py::register_exception<PreconditionError>(m, "PreconditionError", value_error);
  py::register_exception<UnboundedNormError>(m, "UnboundedNormError",
                                             py::make_tuple(base, py::handle(PyExc_ArithmeticError)));

  py::class_<Space>(m, "Space")
      .def_static("grid", [](int dim, int n, const std::string& w) { return build_grid(dim, n, weight_mode(w)); },
                  py::arg("dim"), py::arg("n"), py::arg("weights") = "cell-volume")
      .def_static("cantor", &build_cantor, py::arg("level"), py::arg("dim") = 1,
                  py::arg("budget") = kDefaultPointBudget)
      .def_static("from_coordinates",
                  [](const Array& coords, const Array& weights) {
                    if (coords.ndim() != 2) throw ArgumentError("coordinates must be an (N, dim) array");
                    return Space::from_coordinates(static_cast<std::size_t>(coords.shape(1)), to_vector(coords),
                                                   to_vector(weights));
                  },
                  py::arg("coordinates"), py::arg("weights"))
      .def_static("from_json", [](const std::string& text) { return space_from_json(nlohmann::json::parse(text)); })
      .def("to_json", [](const Space& s) { return space_to_json(s).dump(); })
      .def("__len__", &Space::size)
      .def_property_readonly("dim", &Space::dim)
      .def_property_readonly("diameter", &Space::diameter)
      .def_property_readonly("min_spacing", &Space::min_spacing)
      .def_property_readonly("weights", [](const Space& s) { return to_array(s.weights()); })
      .def_property_readonly("coordinates",
                             [](const Space& s) {
                               auto a = to_array(s.coordinates());
                               if (s.dim() > 0) a.resize({static_cast<py::ssize_t>(s.size()),
                                                          static_cast<py::ssize_t>(s.dim())});
                               return a;
                             })
      .def("dist", &Space::dist)
      .def("ball_mass", [](const Space& s, PointId c, double r) { return ball_mass(s, c, r); });

  py::class_<RoughKernelMatrix>(m, "Kernel")
      .def_property_readonly("values",
                             [](const RoughKernelMatrix& k) {
                               auto a = to_array(k.values);
                               a.resize({static_cast<py::ssize_t>(k.n), static_cast<py::ssize_t>(k.n)});
                               return a;
                             })
      .def_readonly("nu", &RoughKernelMatrix::nu_used)
      .def_readonly("size_constant", &RoughKernelMatrix::size_constant)
      .def_readonly("shell_null_residual", &RoughKernelMatrix::shell_null_residual)
      .def_readonly("max_weighted", &RoughKernelMatrix::max_weighted)
      .def_readonly("row_scale", &RoughKernelMatrix::row_scale)
      .def_readonly("projected", &RoughKernelMatrix::projected);

  py::class_<AhlforsCertificate>(m, "Certificate")
      .def_readonly("nu_hat", &AhlforsCertificate::nu_hat)
      .def_readonly("c1", &AhlforsCertificate::c1_hat)
      .def_readonly("c2", &AhlforsCertificate::c2_hat)
      .def_readonly("r_min", &AhlforsCertificate::r_min)
      .def_readonly("r_max", &AhlforsCertificate::r_max)
      .def("condition", [](const AhlforsCertificate& c) {
        const auto cond = theorem1_condition(c);
        return py::make_tuple(cond.value, cond.holds);
      });

  m.def("certify",
        [](const Space& s, std::optional<double> r_min, std::optional<double> r_max, bool all) {
          if (!r_min && !r_max) return certify_ahlfors(s, !all);
          const auto def = certify_ahlfors(s, !all);
          const double lo = r_min.value_or(def.r_min), hi = r_max.value_or(def.r_max);
          return certify_ahlfors(s, lo, hi, all ? all_centers(s) : interior_centers(s, hi));
        },
        py::arg("space"), py::arg("r_min") = py::none(), py::arg("r_max") = py::none(),
        py::arg("all_centers") = false);
  m.def("certificate_summary", &certificate_dict);
  m.def("check_doubling", [](const Space& s, const AhlforsCertificate& c) {
    const auto r = check_doubling(s, c);
    return py::make_tuple(r.d_theory, r.d_empirical);
  });

  m.def("kernel",
        [](const Space& s, double nu, const std::string& pattern, bool project, std::uint64_t seed) {
          return build_rough_kernel(s, nu, parse_angular_pattern(pattern), project, seed);
        },
        py::arg("space"), py::arg("nu"), py::arg("pattern") = "sign-first-coordinate", py::arg("project") = true,
        py::arg("seed") = 0);

  m.def("maximal_function", [](const Space& s, const Array& f) {
    return to_array(maximal_function(s, field(s, f)).values());
  });
  m.def("riesz_potential",
        [](const Space& s, const Array& f, double order, bool analytic) {
          return to_array(riesz_potential(s, field(s, f), order, analytic).values());
        },
        py::arg("space"), py::arg("f"), py::arg("s"), py::arg("analytic_ball") = false);
  m.def("truncated_singular", [](const Space& s, const RoughKernelMatrix& k, const Array& f, double eps) {
    return to_array(truncated_singular(s, k, field(s, f), eps).values());
  });
  m.def("maximal_singular", [](const Space& s, const RoughKernelMatrix& k, const Array& f) {
    return to_array(maximal_singular(s, k, field(s, f)).values());
  });
  m.def("upper_gradient", [](const Space& s, const Array& f) {
    return to_array(graph_upper_gradient(s, field(s, f)).g.values());
  });

  m.def("lebesgue_norm", [](const Space& s, const Array& f, double p) { return lebesgue_norm(s, field(s, f), p); });
  m.def("lorentz_norm", [](const Space& s, const Array& f, double r, double mm) {
    return lorentz_norm(s, field(s, f), r, mm);
  });
  m.def("morrey_norm", [](const Space& s, const Array& f, double p, double q) {
    return morrey_norm(s, field(s, f), p, q);
  });
  m.def("orlicz_norm",
        [](const Space& s, const Array& f, const std::string& kind, double p, double cap) {
          return orlicz_luxemburg_norm(s, field(s, f), young(kind, p, cap));
        },
        py::arg("space"), py::arg("f"), py::arg("kind") = "power", py::arg("p") = 2.0,
        py::arg("cap") = kInfinity);
  m.def("varexp_norm", [](const Space& s, const Array& f, const Array& exponent) {
    return varexp_luxemburg_norm(s, field(s, f), to_vector(exponent));
  });

  m.def("check_thm1",
        [](const Space& s, const RoughKernelMatrix& k, const Array& f, const AhlforsCertificate& c) {
          const auto ff = field(s, f);
          return to_python(report_to_json(check_thm1(s, k, ff, graph_upper_gradient(s, ff).g, c)));
        });
  m.def("check_thm2",
        [](const Space& s, const Array& f, const AhlforsCertificate& c, double order, double p, double q) {
          return to_python(report_to_json(check_thm2(s, field(s, f), pointwise(order, p, q), c)));
        },
        py::arg("space"), py::arg("f"), py::arg("certificate"), py::arg("s") = 1.0, py::arg("p") = 1.5,
        py::arg("q") = 1.5);
  m.def("check_thm3",
        [](const Space& s, const RoughKernelMatrix& k, const Array& f, const AhlforsCertificate& c, double p,
           double q) {
          const auto ff = field(s, f);
          return to_python(
              report_to_json(check_thm3(s, k, ff, graph_upper_gradient(s, ff).g, pointwise(1.0, p, q), c)));
        },
        py::arg("space"), py::arg("kernel"), py::arg("f"), py::arg("certificate"), py::arg("p") = 1.5,
        py::arg("q") = 1.5);
  m.def("bump_field",
        [](const Space& s, std::uint64_t seed, bool signed_) {
          return to_array((signed_ ? random_signed_bump_field(s, seed) : random_bump_field(s, seed)).values());
        },
        py::arg("space"), py::arg("seed"), py::arg("signed") = false);

  m.def("run",
        [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<std::string> output) {
          RunOverrides o;
          o.seed = seed;
          if (output) o.output_dir = *output;
          std::ostringstream out, err;
          const int code = run_experiment_file(config, o, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("config"), py::arg("seed") = py::none(), py::arg("output") = py::none());
}
