#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slitbilliard/affine.hpp"
#include "slitbilliard/harness/commands.hpp"
#include "slitbilliard/harness/config.hpp"
#include "slitbilliard/normal_forms.hpp"
#include "slitbilliard/trapping.hpp"
#include "slitbilliard/version.hpp"

namespace py = pybind11;
using namespace slitbilliard;

namespace {

py::dict output_dict(const harness::CommandOutput& out) {
  py::dict d;
  d["pass"] = out.pass;
  d["numeric_failure"] = out.numeric_failure;
  d["summary"] = out.summary;
  py::dict files;
  for (const auto& f : out.files) files[py::str(f.name)] = f.text;
  d["files"] = files;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rectangular billiard with two moving slits";
  m.attr("__version__") = std::string(kVersion);

  // Messages start with the error code, e.g. "NotHyperbolic: ...".
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::enum_<Chamber>(m, "Chamber").value("Upper", Chamber::Upper).value("Lower", Chamber::Lower);
  py::enum_<CollisionKind>(m, "CollisionKind")
      .value("None_", CollisionKind::None)
      .value("Slit", CollisionKind::Slit)
      .value("Ceiling", CollisionKind::Ceiling)
      .value("Floor", CollisionKind::Floor);
  py::enum_<Side>(m, "Side").value("LeftLimit", Side::LeftLimit).value("RightLimit", Side::RightLimit);
  py::enum_<TrapKind>(m, "TrapKind")
      .value("LowerTrapping", TrapKind::LowerTrapping)
      .value("UpperTrapping", TrapKind::UpperTrapping)
      .value("NoTrap", TrapKind::NoTrap)
      .value("Degenerate", TrapKind::Degenerate);
  py::enum_<TrajectoryStatus>(m, "TrajectoryStatus")
      .value("Running", TrajectoryStatus::Running)
      .value("SingularHit", TrajectoryStatus::SingularHit)
      .value("Grazing", TrajectoryStatus::Grazing)
      .value("NoConvergence", TrajectoryStatus::NoConvergence);

  py::class_<Harmonic>(m, "Harmonic")
      .def(py::init<int, double>(), py::arg("k"), py::arg("amplitude"))
      .def_readwrite("k", &Harmonic::k)
      .def_readwrite("amplitude", &Harmonic::amplitude);

  py::class_<TrigSeries>(m, "TrigSeries")
      .def(py::init<double, std::vector<Harmonic>, std::vector<Harmonic>>(), py::arg("constant"),
           py::arg("cos") = std::vector<Harmonic>{}, py::arg("sin") = std::vector<Harmonic>{})
      .def("eval",
           [](const TrigSeries& s, double t) {
             const auto w = s.eval(t);
             return py::make_tuple(w.f, w.fd, w.fdd);
           })
      .def_property_readonly("sup_rate", &TrigSeries::sup_rate)
      .def_property_readonly("sup_accel", &TrigSeries::sup_accel);

  py::class_<JumpData>(m, "JumpData")
      .def_readonly("t_star", &JumpData::t_star)
      .def_readonly("f_minus", &JumpData::f_minus)
      .def_readonly("f_plus", &JumpData::f_plus)
      .def_readonly("fdot_minus", &JumpData::fdot_minus)
      .def_readonly("fdot_plus", &JumpData::fdot_plus)
      .def_readonly("l_minus", &JumpData::l_minus)
      .def_readonly("l_plus", &JumpData::l_plus)
      .def_readonly("a", &JumpData::a)
      .def_readonly("a_prime", &JumpData::a_prime);

  py::class_<SlitConfig>(m, "SlitConfig")
      .def(py::init<TrigSeries, TrigSeries, double, double>(), py::arg("left"), py::arg("right"), py::arg("lambda_"),
           py::arg("x0"))
      .def_property_readonly("lambda_", &SlitConfig::lambda)
      .def_property_readonly("x0", &SlitConfig::x0)
      .def_property_readonly("t1_star", &SlitConfig::t1_star)
      .def_property_readonly("t2_star", &SlitConfig::t2_star)
      .def(
          "wall_at",
          [](const SlitConfig& c, double t, Side side) {
            const auto w = c.wall_at(t, side);
            return py::make_tuple(w.f, w.fd, w.fdd);
          },
          py::arg("t"), py::arg("side") = Side::RightLimit)
      .def("jump_data", &SlitConfig::jump_data)
      .def("mirrored", &SlitConfig::mirrored)
      .def("swapped", &SlitConfig::swapped)
      .def("hash", &SlitConfig::hash)
      .def("canonical", &SlitConfig::canonical);
  m.def("example_config", &example_config, py::arg("lambda_"), py::arg("x0"));
  m.def("elliptic_config", &elliptic_config, py::arg("a"));

  py::class_<CollisionRecord>(m, "CollisionRecord")
      .def(py::init([](double t, double v, double y, Chamber ch, CollisionKind k) {
             return CollisionRecord{t, v, y, ch, k};
           }),
           py::arg("t"), py::arg("v"), py::arg("y"), py::arg("chamber"), py::arg("kind") = CollisionKind::Slit)
      .def_readwrite("t", &CollisionRecord::t)
      .def_readwrite("v", &CollisionRecord::v)
      .def_readwrite("y", &CollisionRecord::y)
      .def_readwrite("chamber", &CollisionRecord::chamber)
      .def_readwrite("kind", &CollisionRecord::kind);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("initial", &Trajectory::initial)
      .def_readonly("records", &Trajectory::records)
      .def_readonly("status", &Trajectory::status);

  m.def("slit_record", &slit_record, py::arg("cfg"), py::arg("t"), py::arg("v"), py::arg("chamber"));
  m.def(
      "next_collision", [](const SlitConfig& c, const CollisionRecord& r) { return next_collision(c, r); },
      py::arg("cfg"), py::arg("rec"));
  m.def(
      "collision_map", [](const SlitConfig& c, const CollisionRecord& r) { return collision_map(c, r); },
      py::arg("cfg"), py::arg("rec"));
  m.def(
      "simulate", [](const SlitConfig& c, const CollisionRecord& r, int n) { return simulate(c, r, n); },
      py::arg("cfg"), py::arg("rec"), py::arg("n"), py::call_guard<py::gil_scoped_release>());

  py::class_<ChamberGeometry>(m, "ChamberGeometry")
      .def(py::init<const SlitConfig&, Chamber, bool>(), py::arg("cfg"), py::arg("chamber"),
           py::arg("with_table") = true)
      .def_property_readonly("total", &ChamberGeometry::total)
      .def_property_readonly("alpha", &ChamberGeometry::alpha)
      .def_property_readonly("beta", &ChamberGeometry::beta)
      .def("angle_star", &ChamberGeometry::angle_star)
      .def("angle", &ChamberGeometry::angle)
      .def("time_of_angle", &ChamberGeometry::time_of_angle)
      .def("to_angle_action",
           [](const ChamberGeometry& g, double t, double v) {
             const AngleAction aa = g.to_angle_action(t, v);
             return py::make_tuple(aa.theta, aa.action);
           })
      .def("from_angle_action", [](const ChamberGeometry& g, double theta, double action) {
        const auto tv = g.from_angle_action({theta, action});
        return py::make_tuple(tv[0], tv[1]);
      });

  m.def("compute_constants", [](const SlitConfig& c) {
    const NFConstants k = compute_constants(c);
    py::dict d;
    d["L_star"] = k.L_star;
    d["M_star"] = k.M_star;
    d["theta"] = py::make_tuple(k.theta1, k.theta2);
    d["zeta"] = py::make_tuple(k.zeta1, k.zeta2);
    d["alpha"] = k.alpha;
    d["beta"] = k.beta;
    d["tr_upper"] = k.tr_upper;
    d["tr_lower"] = k.tr_lower;
    d["delta"] = py::make_tuple(k.at(1).delta, k.at(2).delta);
    d["upsilon"] = py::make_tuple(k.at(1).upsilon, k.at(2).upsilon);
    return d;
  });

  py::class_<TrappingVerdict>(m, "TrappingVerdict")
      .def_readonly("kind", &TrappingVerdict::kind)
      .def_readonly("tr_value", &TrappingVerdict::tr_value)
      .def_readonly("hyperbolic", &TrappingVerdict::hyperbolic)
      .def_readonly("delta1", &TrappingVerdict::delta1)
      .def_readonly("delta2", &TrappingVerdict::delta2);
  m.def("classify", &classify, py::arg("cfg"), py::arg("degenerate_tol") = 1e-12);
  m.def("predicted_rate", [](const SlitConfig& c) {
    const GrowthPrediction p = predicted_rate(c, classify(c));
    return py::make_tuple(p.trapping, p.rate, p.contraction);
  });
  m.def("cell_centres", &cell_centres, py::arg("n"));

  py::class_<AffineSystem>(m, "AffineSystem")
      .def_readonly("chamber", &AffineSystem::chamber)
      .def_readonly("trace", &AffineSystem::trace)
      .def_readonly("det", &AffineSystem::det)
      .def_readonly("hyperbolic", &AffineSystem::hyperbolic)
      .def_readonly("lambda_u", &AffineSystem::lambda_u)
      .def_readonly("lambda_s", &AffineSystem::lambda_s)
      .def_readonly("e_u", &AffineSystem::e_u)
      .def_readonly("e_s", &AffineSystem::e_s)
      .def_readonly("dgu", &AffineSystem::dgu);
  m.def("build_affine", py::overload_cast<const SlitConfig&>(&build_affine), py::arg("cfg"));
  m.def("good_line_bound", py::overload_cast<double>(&good_line_bound), py::arg("q"));
  m.def(
      "survival_curve",
      [](const AffineSystem& s, long box, int samples, int periods, std::uint64_t seed) {
        return survival_curve(s, box, samples, periods, seed, 1);
      },
      py::arg("system"), py::arg("box"), py::arg("samples"), py::arg("periods"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "waiting_time",
      [](double D, double lu, double c, double L, double eps) {
        const WaitingTime w = waiting_time(D, lu, c, L, eps);
        return py::make_tuple(w.k, w.l, w.N, w.T);
      },
      py::arg("D"), py::arg("lambda_u"), py::arg("c_star"), py::arg("L"), py::arg("epsilon"));

  m.def("command_names", &harness::command_names);
  m.def(
      "run_config_text",
      [](const std::string& text, std::optional<std::uint64_t> seed, unsigned threads) {
        harness::ParsedConfig pc = harness::parse_config_text(text);
        if (seed) pc.spec.seed = *seed;
        pc.spec.threads = threads;
        if (harness::needs_seed(pc.spec) && !pc.spec.seed)
          throw Error(ErrorCode::InvalidConfig, pc.spec.command + " is stochastic and needs a seed");
        harness::CommandOutput out;
        {
          py::gil_scoped_release release;
          out = harness::execute(pc);
        }
        return output_dict(out);
      },
      py::arg("text"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      "Parses a YAML experiment and runs it in memory; returns pass flag, summary lines and file texts.");
  m.def("canonical_config", [](const std::string& text) { return harness::serialize(harness::parse_config_text(text)); });
}
