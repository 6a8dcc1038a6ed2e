#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "mbk/analysis.hpp"
#include "mbk/engine.hpp"
#include "mbk/error.hpp"
#include "mbk/geometry.hpp"
#include "mbk/io.hpp"
#include "mbk/oracle.hpp"
#include "mbk/sampling.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

mbk::PointMatrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw mbk::ContractViolation("expected a 2-d array of points");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto dim = static_cast<std::size_t>(a.shape(1));
    if (rows == 0) return mbk::PointMatrix(dim);
    std::vector<double> values(a.data(), a.data() + rows * dim);
    return mbk::PointMatrix(dim, std::move(values));
}

Array to_array(const mbk::PointMatrix& m) {
    Array out({m.size(), m.dim()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw mbk::ContractViolation("expected a 1-d array");
    return std::vector<double>(a.data(), a.data() + a.shape(0));
}

py::object json_loads(const std::string& text) {
    return py::module_::import("json").attr("loads")(text);
}

std::string json_dumps(const py::object& obj) {
    return py::module_::import("json").attr("dumps")(obj).cast<std::string>();
}

mbk::RunConfig make_config(std::size_t k, std::size_t b, double eps, const std::string& rate,
                           const std::string& stop, const std::string& init, std::uint64_t seed,
                           std::size_t cap, bool audit_global, const std::string& batch_mode,
                           const std::optional<Array>& initial_centers) {
    mbk::RunConfig cfg;
    cfg.k = k;
    cfg.b = b;
    cfg.rate = mbk::LearningRatePolicy::parse(rate);
    cfg.stop = mbk::parse_stopping_kind(stop) == mbk::StoppingRule::Kind::BatchImprovement
                   ? mbk::StoppingRule::batch_improvement(eps)
                   : mbk::StoppingRule::center_movement(eps);
    cfg.seed = seed;
    cfg.max_iter_cap = cap;
    cfg.audit_global_cost = audit_global;
    cfg.record_cbar = audit_global;
    cfg.batch_mode = mbk::parse_batch_mode(batch_mode);
    if (initial_centers) {
        cfg.init = mbk::InitScheme::Explicit;
        cfg.initial_centers = mbk::Centers(to_matrix(*initial_centers));
    } else {
        cfg.init = mbk::parse_init_scheme(init);
    }
    return cfg;
}

py::dict check_to_dict(const mbk::AuditCheck& c) {
    py::dict d;
    d["name"] = c.name;
    d["total"] = c.total;
    d["violations"] = c.violations;
    d["violation_fraction"] = c.violation_fraction();
    d["budget"] = c.budget;
    d["passed"] = c.passed();
    d["worst_margin"] = c.worst_margin ? py::cast(*c.worst_margin) : py::none();
    d["worst_ratio"] = c.worst_ratio ? py::cast(*c.worst_ratio) : py::none();
    d["details"] = c.details;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Mini-batch k-means with early stopping and termination audits";

    py::register_exception<mbk::ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<mbk::MissingAuditData>(m, "MissingAuditData", PyExc_RuntimeError);
    py::register_exception<mbk::IoError>(m, "IoError", PyExc_OSError);

    m.def("squared_distance", [](const Array& x, const Array& y) {
        return mbk::squared_distance(to_vector(x), to_vector(y));
    });
    m.def("delta_set", [](const Array& s, const Array& c) {
        return mbk::delta_set(to_matrix(s), to_vector(c));
    });
    m.def("center_of_mass", [](const Array& s) { return mbk::center_of_mass(to_matrix(s)); });
    m.def("assign", [](const Array& points, const Array& centers) {
        const auto a = mbk::assign(to_matrix(points), mbk::Centers(to_matrix(centers)));
        return py::make_tuple(a.labels, a.counts);
    });
    m.def("cost", [](const Array& points, const Array& centers) {
        return mbk::cost(to_matrix(points), mbk::Centers(to_matrix(centers)));
    });
    m.def("center_movement", [](const Array& before, const Array& after) {
        return mbk::center_movement(mbk::Centers(to_matrix(before)),
                                    mbk::Centers(to_matrix(after)));
    });

    m.def("generate_synthetic", [](const std::string& spec) {
        return to_array(mbk::io::generate_synthetic(mbk::io::parse_gen_spec(spec)));
    }, py::arg("spec"));
    m.def("ingest_csv", [](const std::string& path, bool normalize, bool header) {
        return to_array(mbk::io::ingest_csv(path, {normalize, header}));
    }, py::arg("path"), py::arg("normalize") = false, py::arg("header") = false);

    m.def("sample_batch", [](const Array& data, std::size_t b, std::uint64_t seed) {
        mbk::RandomStream rng(seed);
        return mbk::sample_batch(mbk::Dataset(to_matrix(data)), b, rng).indices;
    }, py::arg("data"), py::arg("b"), py::arg("seed") = 0);
    m.def("init_kmeanspp", [](const Array& data, std::size_t k, std::uint64_t seed) {
        mbk::RandomStream rng(seed);
        return to_array(mbk::init_kmeanspp(mbk::Dataset(to_matrix(data)), k, rng));
    }, py::arg("data"), py::arg("k"), py::arg("seed") = 0);
    m.def("init_random", [](const Array& data, std::size_t k, std::uint64_t seed) {
        mbk::RandomStream rng(seed);
        return to_array(mbk::init_random(mbk::Dataset(to_matrix(data)), k, rng));
    }, py::arg("data"), py::arg("k"), py::arg("seed") = 0);

    m.def("run",
          [](const Array& data, std::size_t k, std::size_t b, double eps, const std::string& rate,
             const std::string& stop, const std::string& init, std::uint64_t seed,
             std::size_t cap, bool audit_global, const std::string& batch_mode,
             const std::optional<Array>& initial_centers, const std::string& algorithm) {
              const mbk::Dataset dataset(to_matrix(data));
              auto cfg = make_config(k, b, eps, rate, stop, init, seed, cap, audit_global,
                                     batch_mode, initial_centers);
              cfg.algorithm = mbk::parse_algorithm(algorithm);
              return json_loads(mbk::io::serialize_trace(mbk::run(dataset, cfg), std::nullopt));
          },
          py::arg("data"), py::arg("k"), py::arg("b"), py::arg("eps"), py::arg("rate") = "paper",
          py::arg("stop") = "improve", py::arg("init") = "kmeanspp", py::arg("seed") = 0,
          py::arg("cap") = 0, py::arg("audit_global") = false, py::arg("batch_mode") = "sampled",
          py::arg("initial_centers") = std::nullopt, py::arg("algorithm") = "minibatch",
          "Run mini-batch k-means; returns the trace as a dict (same schema as trace JSON).");

    m.def("recommended_batch_size",
          [](const std::string& regime, std::size_t n, std::size_t k, std::size_t d, double eps,
             double c) {
              const auto r = mbk::recommended_batch_size(mbk::parse_batch_regime(regime), n, k, d,
                                                         eps, c);
              py::dict out;
              out["regime"] = mbk::to_string(r.regime);
              out["b"] = r.b;
              out["exceeds_n"] = r.exceeds_n;
              return out;
          },
          py::arg("regime"), py::arg("n"), py::arg("k"), py::arg("d"), py::arg("eps"),
          py::arg("c") = 1.0);
    m.def("termination_bound", &mbk::termination_bound, py::arg("d"), py::arg("eps"),
          py::arg("c_t") = 10.0);
    m.def("termination_bound_sklearn", &mbk::termination_bound_sklearn, py::arg("d"),
          py::arg("eps"), py::arg("k"), py::arg("c_t") = 10.0);

    m.def("audit_trace",
          [](const py::object& trace, const std::string& check, double eps) {
              const auto doc = mbk::io::parse_trace(json_dumps(trace));
              const auto& t = doc.trace;
              const std::size_t d = t.final_centers.dim();
              if (check == "progress") return check_to_dict(mbk::audit_global_progress(t, eps));
              if (check == "proximity") {
                  return check_to_dict(mbk::audit_center_proximity(t, d, eps));
              }
              if (check == "implication") {
                  return check_to_dict(mbk::audit_sklearn_implication(t, eps, t.config.k, d));
              }
              throw mbk::ContractViolation("unknown audit check '" + check + "'");
          },
          py::arg("trace"), py::arg("check"), py::arg("eps"));
    m.def("audit_concentration",
          [](const Array& data, const Array& centers, std::size_t b, std::size_t trials,
             double delta, std::uint64_t seed) {
              mbk::RandomStream rng(seed);
              return check_to_dict(mbk::audit_concentration(mbk::Dataset(to_matrix(data)),
                                                            mbk::Centers(to_matrix(centers)), b,
                                                            trials, delta, rng));
          },
          py::arg("data"), py::arg("centers"), py::arg("b"), py::arg("trials"), py::arg("delta"),
          py::arg("seed") = 0);

    m.def("naive_cost", [](const Array& points, const Array& centers) {
        return mbk::oracle::naive_cost(to_matrix(points), to_matrix(centers));
    });
    m.def("brute_force_optimal", [](const Array& points, std::size_t k) {
        const auto best = mbk::oracle::brute_force_optimal(mbk::oracle::TinyInstance(to_matrix(points), k));
        return py::make_tuple(best.cost, best.labels);
    }, py::arg("points"), py::arg("k"));
}
