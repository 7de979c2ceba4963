#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "pinchflow/canonical.hpp"
#include "pinchflow/cli.hpp"
#include "pinchflow/errors.hpp"
#include "pinchflow/field.hpp"
#include "pinchflow/flow.hpp"
#include "pinchflow/frames.hpp"
#include "pinchflow/identities.hpp"
#include "pinchflow/pinching.hpp"

namespace py = pybind11;
using namespace pinchflow;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array vector_to_numpy(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Array out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out.mutable_at(i) = v(i);
  return out;
}

Array matrix_to_numpy(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Array out({m.rows(), m.cols()});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.mutable_at(i, j) = m(i, j);
  }
  return out;
}

// h[i, j, alpha] as a (n, n, k) array.
SecondFundamentalForm sff_from_numpy(const Array& h) {
  if (h.ndim() != 3 || h.shape(0) != h.shape(1)) {
    throw Error(ErrorCode::BadDims, "h must have shape (n, n, k)");
  }
  const int n = static_cast<int>(h.shape(0)), k = static_cast<int>(h.shape(2));
  if (n < 1 || n > kMaxDim || k < 1 || k > kMaxCodim) throw Error(ErrorCode::BadDims, "h too large");
  return SecondFundamentalForm::from_components(
      n, k, std::span<const double>(h.data(), static_cast<std::size_t>(h.size())));
}

Array sff_to_numpy(const SecondFundamentalForm& h) {
  Array out({h.dim(), h.dim(), h.codim()});
  for (int i = 0; i < h.dim(); ++i) {
    for (int j = 0; j < h.dim(); ++j) {
      for (int a = 0; a < h.codim(); ++a) out.mutable_at(i, j, a) = h(i, j, a);
    }
  }
  return out;
}

// position (m,), first (n, m), second (n, n, m).
Jet2 jet_from_numpy(const Array& position, const Array& first, const Array& second) {
  if (position.ndim() != 1 || first.ndim() != 2 || second.ndim() != 3) {
    throw Error(ErrorCode::BadDims, "jet arrays must have shapes (m,), (n, m), (n, n, m)");
  }
  const int m = static_cast<int>(position.shape(0)), n = static_cast<int>(first.shape(0));
  if (first.shape(1) != m || second.shape(0) != n || second.shape(1) != n || second.shape(2) != m ||
      m > kMaxAmbient || n > kMaxDim || n < 1) {
    throw Error(ErrorCode::BadDims, "inconsistent jet shapes");
  }
  Jet2 jet(n, m);
  for (int c = 0; c < m; ++c) jet.position()(c) = position.at(c);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < m; ++c) jet.first(i)(c) = first.at(i, c);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      AmbientVector v(m);
      for (int c = 0; c < m; ++c) v(c) = second.at(i, j, c);
      jet.set_second(i, j, v);
    }
  }
  return jet;
}

py::dict geometry_dict(const PointGeometry& g) {
  py::dict d;
  d["dim"] = g.dim;
  d["codim"] = g.codim;
  d["metric"] = matrix_to_numpy(g.metric);
  d["sff"] = sff_to_numpy(g.sff);
  d["mean_curvature"] = vector_to_numpy(g.mean_curvature);
  d["norm_a2"] = g.norm_a2;
  d["norm_h2"] = g.norm_h2;
  d["norm_traceless_a2"] = g.norm_traceless_a2;
  d["kperp"] = g.kperp;
  d["gauss"] = g.gauss;
  d["kbar"] = g.kbar;
  return d;
}

GridSurface grid_from_numpy(const Array& points, const std::string& topology) {
  if (points.ndim() != 3) throw Error(ErrorCode::BadDims, "points must have shape (nu, nv, m)");
  Topology t;
  if (topology == "sphere") t = Topology::Sphere;
  else if (topology == "torus") t = Topology::Torus;
  else throw Error(ErrorCode::BadParams, "topology must be 'sphere' or 'torus'");
  const int nu = static_cast<int>(points.shape(0)), nv = static_cast<int>(points.shape(1));
  const int m = static_cast<int>(points.shape(2));
  GridSurface s(t, nu, nv, m);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      for (int c = 0; c < m; ++c) s.sample(i, j)(c) = points.at(i, j, c);
    }
  }
  return s;
}

Array grid_to_numpy(const GridSurface& s) {
  Array out({s.nu(), s.nv(), s.ambient_dim()});
  for (int i = 0; i < s.nu(); ++i) {
    for (int j = 0; j < s.nv(); ++j) {
      for (int c = 0; c < s.ambient_dim(); ++c) out.mutable_at(i, j, c) = s.sample(i, j)(c);
    }
  }
  return out;
}

std::string topology_name(Topology t) { return t == Topology::Sphere ? "sphere" : "torus"; }

ConeParams cone_from(const std::string& variant, int n, double k, double kbar) {
  if (variant == "thm1") return ConeParams::thm1(n, kbar);
  if (variant == "thm2") return ConeParams::thm2(k, 0.0, kbar);
  throw Error(ErrorCode::BadParams, "variant must be 'thm1' or 'thm2'");
}

py::dict record_dict(const MonitorRecord& r) {
  py::dict d;
  d["t"] = r.t;
  d["step"] = r.step;
  d["area"] = r.area;
  d["h_min"] = r.h_min;
  d["h_max"] = r.h_max;
  d["a2_max"] = r.a2_max;
  d["q_min"] = r.q_min;
  d["q_max"] = r.q_max;
  d["ratio_max"] = r.ratio_max;
  d["grad_ratio"] = r.grad_ratio;
  d["kperp_min"] = r.kperp_min;
  d["kperp_max"] = r.kperp_max;
  d["harnack_violations"] = r.harnack_violations;
  d["mean_radius"] = r.mean_radius;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pinchflow, m) {
  m.doc() = "Curvature pinching identities, sweeps and mean curvature flow in spheres";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() -> py::object {
    return py::exception<Error>(m, "PinchflowError", PyExc_RuntimeError);
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  // Pointwise geometry and identities.
  m.def(
      "point_geometry",
      [](const Array& position, const Array& first, const Array& second, double kbar) {
        return geometry_dict(point_geometry(jet_from_numpy(position, first, second), kbar));
      },
      py::arg("position"), py::arg("first"), py::arg("second"), py::arg("kbar") = 1.0,
      "Extrinsic geometry from a second-order jet on the unit sphere.");

  m.def(
      "specialize",
      [](const Array& h) {
        const ABCFrame f = specialize(sff_from_numpy(h));
        py::dict d;
        d["a"] = f.a;
        d["b"] = f.b;
        d["c"] = f.c;
        d["h_norm"] = f.h_norm;
        d["fallback"] = f.fallback;
        d["tangent_rotation"] = matrix_to_numpy(f.tangent_rotation);
        d["normal_rotation"] = matrix_to_numpy(f.normal_rotation);
        return d;
      },
      py::arg("h"));
  m.def(
      "special_form",
      [](double a, double b, double c, double h_norm) {
        return sff_to_numpy(special_form(a, b, c, h_norm));
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("h_norm"));
  m.def(
      "normal_curvature", [](const Array& h) { return normal_curvature(sff_from_numpy(h)); },
      py::arg("h"));

  m.def(
      "reaction_terms",
      [](const Array& h) {
        const ReactionTerms r = reaction_terms(sff_from_numpy(h));
        py::dict d;
        d["r1"] = r.r1;
        d["r2"] = r.r2;
        d["r3"] = r.r3;
        d["z_brute"] = r.z_brute;
        d["z_closed"] = r.z_closed;
        d["rm_perp_2"] = r.rm_perp_2;
        return d;
      },
      py::arg("h"));
  m.def(
      "kperp_checks",
      [](const Array& h, double kbar) {
        const KperpChecks k = kperp_checks(sff_from_numpy(h), kbar);
        py::dict d;
        d["reaction_brute"] = k.reaction_brute;
        d["reaction_closed"] = k.reaction_closed;
        d["laplacian_factor"] = k.laplacian_factor;
        d["li_li_margin"] = k.li_li_margin;
        return d;
      },
      py::arg("h"), py::arg("kbar") = 1.0);

  // Canonical surfaces.
  m.def(
      "canonical_reference",
      [](const std::string& name, double rho, int n, int m_, double r1, double r2) {
        SurfaceParams p{rho, n, m_, r1, r2};
        const ReferenceInvariants& r = make_surface(surface_kind(name), p).reference();
        py::dict d;
        d["norm_a2"] = r.norm_a2;
        d["norm_h2"] = r.norm_h2;
        d["norm_traceless_a2"] = r.norm_traceless_a2;
        d["kperp_abs"] = r.kperp_abs;
        d["gauss"] = r.gauss;
        d["minimal"] = r.minimal;
        return d;
      },
      py::arg("surface"), py::arg("rho") = SurfaceParams{}.rho, py::arg("n") = 2,
      py::arg("m") = 4, py::arg("r1") = 0.6, py::arg("r2") = 0.8);
  m.def(
      "canonical_geometry",
      [](const std::string& name, std::vector<double> u, double rho, int n) {
        SurfaceParams p;
        p.rho = rho;
        p.n = n;
        return geometry_dict(point_geometry(make_surface(surface_kind(name), p).jet(u)));
      },
      py::arg("surface"), py::arg("u"), py::arg("rho") = SurfaceParams{}.rho, py::arg("n") = 2,
      "Geometry of a canonical surface at chart parameters u from its analytic jet.");
  m.def(
      "sample_surface",
      [](const std::string& name, int nu, int nv, double amplitude, int ku, int kv, double rho,
         double r1, double r2) {
        SurfaceParams p;
        p.rho = rho;
        p.r1 = r1;
        p.r2 = r2;
        const CanonicalSurface s = make_surface(surface_kind(name), p);
        const GridSurface g = amplitude == 0.0 ? s.sample(nu, nv)
                                               : perturb(s, nu, nv, PerturbMode{ku, kv, -1}, amplitude);
        return py::make_tuple(grid_to_numpy(g), topology_name(g.topology()));
      },
      py::arg("surface"), py::arg("nu"), py::arg("nv"), py::arg("amplitude") = 0.0,
      py::arg("ku") = 2, py::arg("kv") = 2, py::arg("rho") = SurfaceParams{}.rho,
      py::arg("r1") = 0.6, py::arg("r2") = 0.8,
      "Grid samples of a canonical surface, optionally perturbed; returns (points, topology).");

  // Grid geometry.
  m.def(
      "grid_norm_a2",
      [](const Array& points, const std::string& topology) {
        const GridSurface s = grid_from_numpy(points, topology);
        const GeometryField f = geometry_field(s);
        Array out({s.nu(), s.nv()});
        for (int i = 0; i < s.nu(); ++i) {
          for (int j = 0; j < s.nv(); ++j) {
            const auto& p = f.at(i, j);
            out.mutable_at(i, j) = p ? p->norm_a2 : std::numeric_limits<double>::quiet_NaN();
          }
        }
        return out;
      },
      py::arg("points"), py::arg("topology"), "|A|^2 from finite-difference jets; NaN on pole rows.");
  m.def(
      "gradient_margins",
      [](const Array& points, const std::string& topology) {
        const GridSurface s = grid_from_numpy(points, topology);
        const MarginSummary r = gradient_margin_field(s, geometry_field(s));
        py::dict d;
        d["m1_min"] = r.m1_min;
        d["m2_min"] = r.m2_min;
        d["m3_min"] = r.m3_min;
        d["grad_a2_max"] = r.grad_a2_max;
        d["points"] = r.points;
        d["skipped"] = r.skipped;
        return d;
      },
      py::arg("points"), py::arg("topology"));

  // Pinching lab.
  m.def(
      "q_value",
      [](const Array& h, const std::string& variant, int n, double k, double kbar) {
        return q_value(sff_from_numpy(h), cone_from(variant, n, k, kbar));
      },
      py::arg("h"), py::arg("variant") = "thm1", py::arg("n") = 2, py::arg("k") = 0.725,
      py::arg("kbar") = 1.0);
  m.def(
      "reaction_of_q",
      [](const Array& h, const std::string& variant, int n, double k, double kbar) {
        return reaction_of_q(sff_from_numpy(h), cone_from(variant, n, k, kbar));
      },
      py::arg("h"), py::arg("variant") = "thm1", py::arg("n") = 2, py::arg("k") = 0.725,
      py::arg("kbar") = 1.0);
  m.def(
      "discriminant_report",
      [](int n, double alpha, double beta) {
        const DiscriminantReport r = discriminant_report(n, alpha, beta);
        py::dict d;
        d["delta_printed_1"] = r.delta_printed_1;
        d["delta_printed_2"] = r.delta_printed_2;
        d["direct_negativity"] = r.direct_negativity;
        d["direct_max"] = r.direct_max;
        return d;
      },
      py::arg("n"), py::arg("alpha"), py::arg("beta"));
  m.def(
      "blowup_time",
      [](double b0, double tau, int n) {
        const BlowupTime b = blowup_time(b0, tau, n);
        return py::make_tuple(b.t_star, py::cpp_function([b](double t) { return b(t); }));
      },
      py::arg("b0"), py::arg("tau"), py::arg("n"), "Returns (t_star, b) with b callable.");
  m.def("harnack_bound", &harnack_bound, py::arg("h0"), py::arg("csharp"), py::arg("t"),
        py::arg("delta0"), py::arg("d"));

  // Flow.
  m.def("sphere_ode_oracle", &sphere_ode_oracle, py::arg("rho0"), py::arg("n"), py::arg("t"));
  m.def("sphere_extinction_time", &sphere_extinction_time, py::arg("rho0"), py::arg("n"));
  m.def(
      "flow_run",
      [](const Array& points, const std::string& topology, double t_max, double cfl,
         double ceiling, int stride, const std::string& scheme, bool gradients, int threads) {
        const GridSurface s = grid_from_numpy(points, topology);
        RunOptions o;
        o.t_max = t_max;
        o.step.cfl = cfl;
        o.step.ceiling = ceiling;
        o.step.scheme = scheme_from_string(scheme);
        o.step.threads = threads;
        o.stride = stride;
        o.monitor.cone = ConeParams::thm1(2);
        o.monitor.gradients = gradients;
        o.monitor.threads = threads;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(s, o);
        }
        py::dict d;
        d["outcome"] = std::string(to_string(r.outcome));
        d["reason"] = r.reason;
        d["extinction_time"] = r.extinction_time;
        py::list records;
        for (const auto& rec : r.records) records.append(record_dict(rec));
        d["records"] = records;
        d["t_final"] = r.final_state.t;
        d["steps"] = r.final_state.step_index;
        d["final_points"] = grid_to_numpy(r.final_state.surface);
        return d;
      },
      py::arg("points"), py::arg("topology"), py::arg("t_max") = 1.0, py::arg("cfl") = 0.2,
      py::arg("ceiling") = 1e6, py::arg("stride") = 10, py::arg("scheme") = "euler",
      py::arg("gradients") = true, py::arg("threads") = 0,
      "Mean curvature flow with Thm1 monitors until an outcome is resolved.");

  // Command line, driven by a JSON config string.
  m.def(
      "execute",
      [](const std::string& config) {
        std::ostringstream out, err;
        int code = 0;
        try {
          code = cli::execute(cli::Json::parse(config), out, err);
        } catch (const cli::Json::parse_error& e) {
          err << e.what() << "\n";
          code = cli::kConfigError;
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("config"), "Runs a CLI config; returns (exit_status, stdout, stderr).");
}
