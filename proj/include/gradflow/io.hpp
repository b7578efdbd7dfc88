#ifndef GRADFLOW_IO_HPP
#define GRADFLOW_IO_HPP

#include <json.hpp>

#include <string>

#include "gradflow/flows.hpp"
#include "gradflow/functional.hpp"
#include "gradflow/oracle.hpp"
#include "gradflow/schedule.hpp"
#include "gradflow/space.hpp"

namespace gradflow {
namespace io {

using nlohmann::json;

// 17 significant digits; round-trips a double exactly.
std::string format_double(double v);

SpaceDescriptor parse_space(const json& j);
Point parse_point(const SpaceDescriptor& space, const json& j);
GeodesicBall parse_region(const SpaceDescriptor& space, const json& j);
StepSchedule parse_schedule(const json& j);
FunctionalSpec parse_functional(const GeodesicBall& region, const json& j);

json point_json(const Point& p);

// Fixed CSV layout, one row per iterate:
// m,x0..x{d-1},f,dist_to_ref,lambda,monotone_residual,bound_residual,drift_margin
std::string run_record_csv(const RunRecord& run);
std::string jensen_csv(const JensenRecord& rec);

json run_record_json(const RunRecord& run, const json& config_echo);
json report_json(const std::string& check, const oracle::VerifyReport& report,
                 double tolerance);

}  // namespace io
}  // namespace gradflow

#endif
