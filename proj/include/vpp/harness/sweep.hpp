#pragma once

// One run per value of a single plan parameter.

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpp/harness/run.hpp"

namespace vpp::harness {

/// Sets a plan field from its textual value.
inline void apply_parameter(ExperimentPlan& plan, const std::string& name, const std::string& value) {
  try {
    if (name == "alpha") plan.alpha = std::stod(value);
    else if (name == "gamma1") plan.gamma1 = std::stod(value);
    else if (name == "selection") plan.selection = value;
    else if (name == "n_points") plan.n_points = std::stoul(value);
    else if (name == "steps_per_point") plan.steps_per_point = std::stod(value);
    else if (name == "depth_filter") plan.depth_filter = std::stoi(value);
    else if (name == "beta") plan.beta = std::stod(value);
    else if (name == "rho") plan.rho = std::stod(value);
    else if (name == "replicates") plan.replicates = std::stoul(value);
    else throw std::invalid_argument("sweep: unsupported parameter '" + name + "'");
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const std::invalid_argument*>(&e) &&
        std::string(e.what()).rfind("sweep:", 0) == 0)
      throw;
    throw std::invalid_argument("sweep: bad value '" + value + "' for " + name);
  }
}

/// "a:step:b" (inclusive arithmetic progression) or a comma-separated list.
inline std::vector<std::string> parse_values(const std::string& spec) {
  std::vector<std::string> out;
  if (spec.find(':') != std::string::npos && spec.find(',') == std::string::npos) {
    double a, step, b;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> a >> c1 >> step >> c2 >> b) || c1 != ':' || c2 != ':' || !(step > 0.0) || b < a)
      throw std::invalid_argument("bad range '" + spec + "' (expected start:step:stop)");
    const long count = std::lround(std::floor((b - a) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", a + static_cast<double>(k) * step);
      out.emplace_back(buf);
    }
    return out;
  }
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct SweepPoint {
  std::string value;
  std::optional<ResultRecord> record;
  std::string error;
};

/// Every grid point uses the template's seed root; a failing point does not
/// stop the others.
inline std::vector<SweepPoint> sweep(const ExperimentPlan& base, const std::string& parameter,
                                     const std::vector<std::string>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: empty parameter grid");
  {
    ExperimentPlan probe = base;
    apply_parameter(probe, parameter, values.front());
  }
  std::vector<SweepPoint> points;
  for (const auto& v : values) {
    SweepPoint p;
    p.value = v;
    try {
      ExperimentPlan plan = base;
      apply_parameter(plan, parameter, v);
      p.record = run(plan);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
    points.push_back(std::move(p));
  }
  return points;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& parameter,
                             const ExperimentPlan& base) {
  std::ostringstream os;
  os << "# vpp " << kVersion << " sweep over " << parameter << " template "
     << fingerprint(base) << " seed " << base.seed << '\n';
  os << parameter << ",fingerprint,count,mean_r_star,sd,se,failures,gamma_shape,error\n";
  for (const auto& p : points) {
    os << p.value << ',';
    if (p.record) {
      const auto& r = *p.record;
      os << r.fingerprint << ',' << r.r_star.count << ',' << csv_number(r.r_star.mean) << ','
         << csv_number(r.r_star.sd) << ',' << csv_number(r.r_star.se) << ',' << r.failures << ','
         << (r.gamma_shape ? csv_number(*r.gamma_shape) : "") << ",\n";
    } else {
      os << ",0,,,,,,\"" << p.error << "\"\n";
    }
  }
  return os.str();
}

}  // namespace vpp::harness
