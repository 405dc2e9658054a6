#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "armax/errors.hpp"
#include "armax/model.hpp"
#include "armax/trajectory.hpp"

namespace armax {

/// Shortest decimal text that parses back to the identical double, so CSV
/// round trips are lossless.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::size_t row) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    throw ParseError("row " + std::to_string(row) + ": bad number '" +
                     std::string(text) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Writes the trajectory as `k,u,y[,w,x1..xn]` rows.
inline void save_trajectory(const Trajectory& traj,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  const bool truth = traj.w.has_value() && traj.x.has_value();
  const std::size_t n =
      truth && !traj.x->empty() ? static_cast<std::size_t>((*traj.x)[0].size()) : 0;
  out << "k,u,y";
  if (truth) {
    out << ",w";
    for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  }
  out << "\n";
  for (std::size_t k = 0; k < traj.length(); ++k) {
    out << k << ',' << format_double(traj.u[k]) << ',' << format_double(traj.y[k]);
    if (truth) {
      out << ',' << format_double((*traj.w)[k]);
      for (std::size_t i = 0; i < n; ++i)
        out << ',' << format_double((*traj.x)[k][static_cast<Eigen::Index>(i)]);
    }
    out << "\n";
  }
}

/// Reads a trajectory CSV; truth columns are picked up when present.
/// Malformed rows raise ParseError with the offending row number.
inline Trajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "k" || header[1] != "u" || header[2] != "y")
    throw ParseError("row 0: header must start with k,u,y");
  const bool truth = header.size() > 3;
  std::size_t n = 0;
  if (truth) {
    if (header[3] != "w") throw ParseError("row 0: expected w column");
    n = header.size() - 4;
    for (std::size_t i = 0; i < n; ++i)
      if (header[4 + i] != "x" + std::to_string(i + 1))
        throw ParseError("row 0: expected x" + std::to_string(i + 1) + " column");
  }

  Trajectory traj;
  if (truth) {
    traj.w.emplace();
    traj.x.emplace();
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    traj.u.push_back(parse_double(fields[1], row));
    traj.y.push_back(parse_double(fields[2], row));
    if (truth) {
      traj.w->push_back(parse_double(fields[3], row));
      Eigen::VectorXd x(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        x[static_cast<Eigen::Index>(i)] = parse_double(fields[4 + i], row);
      traj.x->push_back(std::move(x));
    }
    ++row;
  }
  return traj;
}

inline nlohmann::json params_to_json(const ArmaxParams& params) {
  return nlohmann::json{{"a", params.a.coeffs},
                        {"b", params.b.coeffs},
                        {"c", params.c.coeffs},
                        {"sigma2", params.sigma2}};
}

inline ArmaxParams params_from_json(const nlohmann::json& j) {
  try {
    return ArmaxParams(j.value("a", std::vector<double>{}),
                       j.value("b", std::vector<double>{}),
                       j.value("c", std::vector<double>{}),
                       j.value("sigma2", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
}

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline void write_json(const nlohmann::json& j,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace armax
