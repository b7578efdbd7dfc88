#include "gradflow/io.hpp"

#include <cstdio>
#include <sstream>

namespace gradflow {
namespace io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SpaceDescriptor parse_space(const json& j) {
  const SpaceKind kind = space_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case SpaceKind::euclidean:
      return SpaceDescriptor::Euclidean(j.at("dimension").get<int>());
    case SpaceKind::sphere:
      return SpaceDescriptor::Sphere(j.at("dimension").get<int>(),
                                     j.at("kappa").get<double>());
    case SpaceKind::hyperbolic:
      return SpaceDescriptor::Hyperbolic(j.at("dimension").get<int>(),
                                         j.at("kappa").get<double>());
    case SpaceKind::spider:
      return SpaceDescriptor::Spider(j.at("legs").get<int>());
  }
  throw InvalidArgument("unknown space kind");
}

Point parse_point(const SpaceDescriptor& space, const json& j) {
  if (!j.is_array()) throw InvalidArgument("point must be a coordinate array");
  Vector x(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) x[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  if (x.size() != space.ambient_dim())
    throw InvalidArgument("point has the wrong number of coordinates");
  return Point(space, x);
}

GeodesicBall parse_region(const SpaceDescriptor& space, const json& j) {
  return GeodesicBall(parse_point(space, j.at("center")),
                      j.at("radius").get<double>());
}

StepSchedule parse_schedule(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  StepSchedule s;
  if (kind == "constant") {
    s = StepSchedule::Constant(j.at("c").get<double>());
  } else if (kind == "harmonic") {
    s = StepSchedule::Harmonic(j.at("c").get<double>());
  } else if (kind == "power") {
    s = StepSchedule::Power(j.at("c").get<double>(), j.at("q").get<double>());
  } else {
    throw InvalidArgument("unknown schedule kind: " + kind);
  }
  if (j.contains("cap")) s = s.with_cap(j.at("cap").get<double>());
  return s;
}

FunctionalSpec parse_functional(const GeodesicBall& region, const json& j) {
  if (j.contains("affine")) {
    const json& a = j.at("affine");
    Vector slope(static_cast<Eigen::Index>(a.at("slope").size()));
    for (std::size_t i = 0; i < a.at("slope").size(); ++i)
      slope[static_cast<Eigen::Index>(i)] = a.at("slope")[i].get<double>();
    return FunctionalSpec::Affine(slope, a.value("offset", 0.0), region);
  }
  std::vector<DistanceAtom> atoms;
  for (const json& ja : j.at("atoms")) {
    DistanceAtom atom;
    atom.anchor = parse_point(region.center.space, ja.at("anchor"));
    atom.weight = ja.value("weight", 1.0);
    atom.power = ja.value("power", 2.0);
    atoms.push_back(atom);
  }
  if (atoms.size() == 1 && atoms[0].weight == 1.0) {
    if (atoms[0].power == 2.0)
      return FunctionalSpec::SquaredDistance(atoms[0].anchor, region);
    return FunctionalSpec::DistancePower(atoms[0].anchor, atoms[0].power, region);
  }
  return FunctionalSpec::WeightedSum(std::move(atoms), region);
}

json point_json(const Point& p) {
  json coords = json::array();
  for (Eigen::Index i = 0; i < p.x.size(); ++i) coords.push_back(p.x[i]);
  return coords;
}

std::string run_record_csv(const RunRecord& run) {
  std::ostringstream out;
  const int d = run.space.ambient_dim();
  out << "m";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << ",f,dist_to_ref,lambda,monotone_residual,bound_residual,drift_margin\n";
  for (const auto& row : run.rows) {
    out << row.m;
    for (int i = 0; i < d; ++i) out << ',' << format_double(row.x.x[i]);
    out << ',' << format_double(row.f_value) << ','
        << format_double(row.dist_to_ref) << ',' << format_double(row.lambda)
        << ',' << format_double(row.monotone_residual) << ','
        << format_double(row.bound_residual) << ','
        << format_double(row.drift_margin) << '\n';
  }
  return out.str();
}

std::string jensen_csv(const JensenRecord& rec) {
  std::ostringstream out;
  if (rec.rows.empty()) return "k,z,f_s,gap\n";
  const Eigen::Index d = rec.rows[0].s.x.size();
  out << "k";
  for (Eigen::Index i = 0; i < d; ++i) out << ",x" << i;
  out << ",z,f_s,gap\n";
  for (const auto& row : rec.rows) {
    out << row.k;
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(row.s.x[i]);
    out << ',' << format_double(row.z) << ',' << format_double(row.f_s) << ','
        << format_double(row.z - row.f_s) << '\n';
  }
  return out.str();
}

json run_record_json(const RunRecord& run, const json& config_echo) {
  json j;
  j["config"] = config_echo;
  j["flow"] = run.flow;
  j["schedule"] = run.schedule;
  j["seed"] = run.seed;
  j["status"] = run.status;
  j["iterations"] = run.rows.empty() ? 0 : run.rows.back().m;
  j["min_certificate_residual"] = run.min_certificate_residual();
  if (run.reference) j["reference"] = point_json(*run.reference);
  if (!run.rows.empty()) {
    j["terminal"] = point_json(run.terminal());
    j["terminal_f"] = run.rows.back().f_value;
  }
  if (!run.envelope.empty()) j["envelope"] = run.envelope;
  j["events"] = run.events;
  return j;
}

json report_json(const std::string& check, const oracle::VerifyReport& report,
                 double tolerance) {
  json j;
  j["check"] = check;
  j["min_margin"] = report.min_margin;
  j["samples"] = report.samples;
  j["witness"] = report.witness;
  j["tolerance"] = tolerance;
  j["pass"] = report.pass(tolerance);
  return j;
}

}  // namespace io
}  // namespace gradflow
