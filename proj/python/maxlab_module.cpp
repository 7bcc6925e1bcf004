// Python bindings for the maximal-function laboratory: grids, the maximal
// operators with good-ball tracking, discrete calculus, the verification
// checks and the continuity experiment.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>

#include "maxlab/continuity.hpp"
#include "maxlab/corpus.hpp"
#include "maxlab/oracle.hpp"
#include "maxlab/report.hpp"

namespace py = pybind11;
using namespace maxlab;

namespace {

std::vector<std::int64_t> shape_of(const Domain& dom) {
  std::vector<std::int64_t> s;
  for (int a = 0; a < dom.d; ++a) s.push_back(dom.dims[a]);
  return s;
}

py::array_t<double> values_array(const Domain& dom, const std::vector<double>& v) {
  py::array_t<double> arr(shape_of(dom));
  std::memcpy(arr.mutable_data(), v.data(), v.size() * sizeof(double));
  return arr;
}

GridFunction grid_from_array(const Domain& dom, py::array_t<double, py::array::c_style> arr) {
  GridFunction f;
  f.domain = dom;
  require(arr.size() == dom.size(), errc::bad_argument, "array size does not match the domain");
  f.values.assign(arr.data(), arr.data() + arr.size());
  f.validate();
  return f;
}

Coord coord_from_seq(const std::vector<double>& v) {
  require(v.size() <= kMaxDim, errc::dimension_overflow, "too many coordinates");
  Coord c{};
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i];
  return c;
}

py::dict report_dict(const CheckReport& rep) {
  py::dict d;
  d["check_name"] = rep.check_name;
  d["points_tested"] = rep.points_tested;
  d["ties_excluded"] = rep.ties_excluded;
  d["max_violation"] = rep.max_violation;
  d["q50"] = rep.q50;
  d["q90"] = rep.q90;
  d["q99"] = rep.q99;
  d["q100"] = rep.q100;
  d["tolerance_used"] = rep.tolerance_used;
  d["pass"] = rep.pass;
  py::dict stats;
  for (const auto& [k, v] : rep.stats) stats[py::str(k)] = v;
  d["stats"] = stats;
  return d;
}

}  // namespace

PYBIND11_MODULE(_maxlab, m) {
  m.doc() = "fractional Hardy-Littlewood maximal function laboratory";

  py::register_exception<error>(m, "MaxlabError");

  py::class_<Domain>(m, "Domain")
      .def(py::init([](int d, std::vector<std::int64_t> dims, double h,
                       std::vector<double> origin) {
             Domain dom;
             dom.d = d;
             require(dims.size() == static_cast<std::size_t>(d) &&
                         origin.size() == static_cast<std::size_t>(d),
                     errc::bad_argument, "dims/origin must have d entries");
             for (int a = 0; a < d; ++a) {
               dom.dims[a] = dims[static_cast<std::size_t>(a)];
               dom.origin[a] = origin[static_cast<std::size_t>(a)];
             }
             dom.h = h;
             dom.validate();
             return dom;
           }),
           py::arg("d"), py::arg("dims"), py::arg("h"), py::arg("origin"))
      .def_readonly("d", &Domain::d)
      .def_readonly("h", &Domain::h)
      .def_property_readonly("dims", [](const Domain& d) { return shape_of(d); })
      .def_property_readonly("origin",
                             [](const Domain& d) {
                               std::vector<double> o;
                               for (int a = 0; a < d.d; ++a) o.push_back(d.origin[a]);
                               return o;
                             })
      .def("size", &Domain::size);

  m.def("make_domain", &make_domain, py::arg("d"), py::arg("n_per_axis"), py::arg("h"),
        py::arg("lo"));

  py::class_<GridFunction>(m, "GridFunction")
      .def(py::init(&grid_from_array), py::arg("domain"), py::arg("values"))
      .def_readonly("domain", &GridFunction::domain)
      .def_property_readonly(
          "values", [](const GridFunction& f) { return values_array(f.domain, f.values); });

  m.def(
      "make_test_function",
      [](const std::string& kind, const Domain& dom, std::vector<double> center, double sigma,
         double amplitude, double radius, double separation, double second_amplitude) {
        ShapeParams p;
        if (!center.empty()) p.center = coord_from_seq(center);
        p.sigma = sigma;
        p.amplitude = amplitude;
        p.radius = radius;
        p.separation = separation;
        p.second_amplitude = second_amplitude;
        return make_test_function(test_function_kind_from_name(kind), dom, p);
      },
      py::arg("kind"), py::arg("domain"), py::arg("center") = std::vector<double>{},
      py::arg("sigma") = 0.25, py::arg("amplitude") = 1.0, py::arg("radius") = 1.0,
      py::arg("separation") = 1.0, py::arg("second_amplitude") = 1.0);

  m.def("corpus_function", &corpus_function, py::arg("name"), py::arg("d"), py::arg("h"),
        py::arg("half_side") = 4.0);

  m.def("read_grid", &read_grid, py::arg("path"));
  m.def("write_grid", &write_grid, py::arg("f"), py::arg("path"));

  py::class_<RadiusGrid>(m, "RadiusGrid")
      .def_readonly("radii", &RadiusGrid::radii)
      .def_readonly("h_link", &RadiusGrid::h_link)
      .def_readonly("rho_step", &RadiusGrid::rho_step);
  m.def("make_default_radius_grid", &make_default_radius_grid, py::arg("h"), py::arg("r_max"),
        py::arg("rho_step") = 1.0 / 16.0);
  m.def("make_linear_radius_grid", &make_linear_radius_grid, py::arg("h"), py::arg("r_max"));
  m.def("make_rgrid_for", &make_rgrid_for, py::arg("f"), py::arg("rho_step") = 1.0 / 16.0);

  m.def("unit_ball_volume", &unit_ball_volume, py::arg("d"));
  m.def(
      "ball_average",
      [](const GridFunction& f, std::vector<double> center, double radius,
         const std::string& mode, int component) {
        AverageMode am = AverageMode::absolute();
        if (mode == "signed") am = AverageMode::raw();
        else if (mode == "gradient") am = AverageMode::gradient(component);
        else require(mode == "abs", errc::bad_argument, "mode must be abs|signed|gradient");
        return ball_average(f, {coord_from_seq(center), radius}, am);
      },
      py::arg("f"), py::arg("center"), py::arg("radius"), py::arg("mode") = "abs",
      py::arg("component") = 0);

  py::class_<MaximalField>(m, "MaximalField")
      .def_property_readonly("values",
                             [](const MaximalField& f) {
                               return values_array(f.values.domain, f.values.values);
                             })
      .def_property_readonly("domain", [](const MaximalField& f) { return f.values.domain; })
      .def_readonly("ties_tracked", &MaximalField::ties_tracked)
      .def_property_readonly("alpha",
                             [](const MaximalField& f) { return f.params.alpha; })
      .def_property_readonly("delta",
                             [](const MaximalField& f) { return f.params.delta; })
      .def_property_readonly("ball_radii",
                             [](const MaximalField& f) {
                               std::vector<double> r;
                               for (const auto& b : f.balls) r.push_back(b.radius);
                               return values_array(f.values.domain, r);
                             })
      .def_property_readonly("ball_values",
                             [](const MaximalField& f) {
                               std::vector<double> r;
                               for (const auto& b : f.balls) r.push_back(b.value);
                               return values_array(f.values.domain, r);
                             })
      .def_property_readonly("tie_counts",
                             [](const MaximalField& f) {
                               std::vector<double> r;
                               for (const auto& b : f.balls)
                                 r.push_back(static_cast<double>(b.tie_count));
                               return values_array(f.values.domain, r);
                             })
      .def("ball",
           [](const MaximalField& f, std::int64_t flat) {
             BallSpec b = f.ball_spec(flat);
             std::vector<double> c;
             for (int a = 0; a < f.source_domain.d; ++a) c.push_back(b.center[a]);
             return py::make_tuple(c, b.radius, f.ball(flat).value);
           },
           py::arg("flat_index"));

  m.def(
      "compute_maximal",
      [](const GridFunction& f, double alpha, double delta, const std::string& kind,
         std::optional<RadiusGrid> rgrid, bool with_ties, bool exhaustive, int workers) {
        FracParams p{alpha, delta, operator_kind_from_name(kind)};
        RadiusGrid rg = rgrid ? *rgrid : make_rgrid_for(f);
        ComputeOptions opts;
        opts.with_ties = with_ties;
        opts.exhaustive = exhaustive;
        opts.workers = workers;
        return compute_maximal(f, p, rg, opts);
      },
      py::arg("f"), py::arg("alpha"), py::arg("delta") = 0.0, py::arg("kind") = "centered",
      py::arg("rgrid") = std::nullopt, py::arg("with_ties") = true,
      py::arg("exhaustive") = false, py::arg("workers") = 1);

  m.def(
      "brute_force_maximal",
      [](const GridFunction& f, double alpha, double delta, std::vector<double> x,
         const std::string& kind, std::optional<RadiusGrid> rgrid, int fine_factor) {
        RadiusGrid rg = rgrid ? *rgrid : make_rgrid_for(f);
        OracleResult r = brute_force_maximal(f, alpha, delta, coord_from_seq(x),
                                             operator_kind_from_name(kind), rg,
                                             {fine_factor, true, true});
        std::vector<double> c;
        for (int a = 0; a < f.domain.d; ++a) c.push_back(r.ball.center[a]);
        return py::make_tuple(r.value, c, r.ball.radius);
      },
      py::arg("f"), py::arg("alpha"), py::arg("delta"), py::arg("x"),
      py::arg("kind") = "centered", py::arg("rgrid") = std::nullopt,
      py::arg("fine_factor") = 1);

  m.def("closed_form_1d", [](const std::string& name, double alpha) {
    ClosedFormCase c;
    if (name == "triangle_center") c = ClosedFormCase::triangle_center;
    else if (name == "indicator_right_centered") c = ClosedFormCase::indicator_right_centered;
    else if (name == "indicator_right_noncentered")
      c = ClosedFormCase::indicator_right_noncentered;
    else fail(errc::unsupported_case, "unknown closed form: " + name);
    ClosedForm1d r = closed_form_1d(c, alpha);
    return py::make_tuple(r.value, r.radius, r.center);
  });

  m.def("refined_maximal_minus1", &refined_maximal_minus1, py::arg("f"), py::arg("field"));

  m.def("gradient", [](const GridFunction& f) {
    GradientField g = gradient(f);
    py::list comps;
    for (const auto& c : g.components) comps.append(values_array(g.domain, c));
    return comps;
  });
  m.def("gradient_magnitude", [](const GridFunction& f) {
    GridFunction m2 = gradient(f).magnitude();
    return values_array(m2.domain, m2.values);
  });
  m.def("lq_norm",
        [](const GridFunction& f, double q) { return lq_norm(f, q); }, py::arg("f"),
        py::arg("q"));
  m.def("w11_norm", &w11_norm, py::arg("f"));

  m.def(
      "check",
      [](const std::string& name, const GridFunction& f, double alpha, double delta,
         const std::string& kind, int workers) {
        VerifyOptions opts;
        opts.kind = operator_kind_from_name(kind);
        opts.workers = workers;
        RadiusGrid rg = make_rgrid_for(f);
        CheckReport rep;
        if (name == "kinnunen") rep = check_kinnunen(f, alpha, rg, opts);
        else if (name == "refined_ks") rep = check_refined_ks(f, alpha, delta, rg, opts);
        else if (name == "luiro") rep = check_luiro(f, alpha, delta, rg, opts);
        else if (name == "poincare") rep = check_poincare(f, alpha, 2.0, rg, opts);
        else if (name == "weak_type") rep = check_weak_type(f, alpha, rg, opts);
        else if (name == "delta_bound")
          rep = check_delta_gradient_bound(f, alpha, delta, rg, opts);
        else if (name == "scaling") rep = check_scaling_covariance(f, alpha, rg, opts);
        else fail(errc::bad_argument, "unknown check: " + name);
        return report_dict(rep);
      },
      py::arg("name"), py::arg("f"), py::arg("alpha"), py::arg("delta") = 0.0,
      py::arg("kind") = "centered", py::arg("workers") = 1);

  m.def(
      "sobolev_ratio",
      [](const GridFunction& f, double alpha, const std::string& kind) {
        VerifyOptions opts;
        opts.kind = operator_kind_from_name(kind);
        return check_sobolev_ratio(f, alpha, make_rgrid_for(f), opts);
      },
      py::arg("f"), py::arg("alpha"), py::arg("kind") = "centered");

  m.def(
      "make_sequence",
      [](const GridFunction& f, const std::string& kind, std::vector<int> j_values) {
        SequenceSpec spec;
        spec.kind = sequence_kind_from_name(kind);
        if (!j_values.empty()) spec.j_values = j_values;
        return make_sequence(f, spec);
      },
      py::arg("f"), py::arg("kind") = "additive_bump", py::arg("j_values") = std::vector<int>{});

  m.def(
      "run_continuity",
      [](const GridFunction& f, double alpha, const std::string& seq_kind,
         const std::string& kind, int workers) {
        ContinuityConfig cfg;
        cfg.alpha = alpha;
        cfg.seq.kind = sequence_kind_from_name(seq_kind);
        cfg.kind = operator_kind_from_name(kind);
        cfg.workers = workers;
        ContinuityRun run = run_continuity(f, cfg);
        return py::module_::import("json").attr("loads")(to_json(run).dump());
      },
      py::arg("f"), py::arg("alpha") = 0.5, py::arg("seq_kind") = "additive_bump",
      py::arg("kind") = "centered", py::arg("workers") = 1);

  m.attr("__version__") = "1.0.0";
}
