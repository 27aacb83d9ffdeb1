#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcflow/flow.hpp"
#include "qcflow/quasipolar.hpp"
#include "qcflow/variation.hpp"

namespace qcflow::io {

/// %.17g, enough digits to round-trip any double.
std::string format_double(double v);

/// `t,re,im` rows followed by `# event,<name>,<t>` comment lines.
std::string trajectory_csv(const Trajectory& traj);

/// Parses the trajectory CSV. Velocities are not stored, so samples carry dx = 0.
/// Throws ConfigParse on a missing header, malformed rows or non-increasing times.
Trajectory parse_trajectory_csv(const std::string& text);

/// `re,im,rho,theta,lambda_factor` rows.
std::string grid_csv(std::span<const QuasipolarGridRow> rows);

/// Trajectories as polylines over the window, with the unit circle marked.
std::string phase_portrait_svg(std::span<const Trajectory> trajs, const AnnulusWindow& window);

/// Two panels: trajectories through e^{i theta_j} and their straightened images |z| e^{i theta_j}.
std::string rectification_svg(const FieldDescriptor& field, const AnnulusWindow& window, std::size_t n_curves,
                              double tolerance);

nlohmann::json to_json(const VariationEstimate& v);
nlohmann::json to_json(const QuadraticBoundReport& r);
nlohmann::json to_json(const CertificateReport& r);

std::string read_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace qcflow::io
