// ppwave: CSV plot data and JSON serialization.
//
// Every floating-point value written to CSV uses 17 significant digits, so
// it reads back to the same double. Files are written to a temporary name in
// the target directory and renamed into place.

#ifndef PPWAVE_IO_HPP_
#define PPWAVE_IO_HPP_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppwave/common.hpp"
#include "ppwave/geodesics.hpp"
#include "ppwave/reachability.hpp"
#include "ppwave/timefunctions.hpp"

namespace ppwave {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void atomic_write(std::filesystem::path const& path,
                         std::string_view content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() +
                    ": " + ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

// Clip of an extended real for JSON, which has no infinities.
inline double clip(double x, double bound) {
  return std::clamp(x, -bound, bound);
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr char kCurveCsvHeader[] =
    "s,xi,eta,tau,dxi,deta,dtau,norm_sq,first_integral";

inline std::string curve_csv(CurveSample const& c) {
  std::ostringstream os;
  os << kCurveCsvHeader << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    Point3 const& p = c.points[i];
    Tangent3 const& v = c.tangents[i];
    os << format_double(c.params[i]) << ',' << format_double(p.xi) << ','
       << format_double(p.eta) << ',' << format_double(p.tau) << ','
       << format_double(v.dxi) << ',' << format_double(v.deta) << ','
       << format_double(v.dtau) << ',' << format_double(c.logs[i].norm_sq)
       << ',' << format_double(c.logs[i].first_integral) << '\n';
  }
  return os.str();
}

inline constexpr char kGradientCsvHeader[] = "xi,tau,norm_sq";

// Grid values are recomputed from the closed form; the report only keeps
// the reductions. `stride` thins the grid in both directions.
inline std::string gradient_grid_csv(GradReport const& report,
                                     TimeFnParams const& params,
                                     std::size_t stride = 1) {
  GridSpec2 const& g = report.grid;
  stride = std::max<std::size_t>(stride, 1);
  std::ostringstream os;
  os << kGradientCsvHeader << '\n';
  for (std::size_t j = 0; j < g.n_tau; j += stride) {
    for (std::size_t i = 0; i < g.n_xi; i += stride) {
      Point3 const p{g.xi_at(i), 0.0, g.tau_at(j)};
      os << format_double(p.xi) << ',' << format_double(p.tau) << ','
         << format_double(grad_time_fn(p, params).norm_sq) << '\n';
    }
  }
  return os.str();
}

inline constexpr char kSliceCsvHeader[] = "tau,L,U";
inline constexpr char kSliceIndexHeader[] = "slice,eta,cells,file";

// One CSV per eta node holding its non-empty cells, plus index.csv.
// Returns the written paths, index first.
inline std::vector<std::filesystem::path> write_diamond_csv(
    DiamondResult const& r, std::filesystem::path const& dir) {
  std::vector<std::filesystem::path> written;
  std::ostringstream index;
  index << kSliceIndexHeader << '\n';
  std::vector<std::pair<std::filesystem::path, std::string>> files;
  for (std::size_t k = 0; k < r.slices.size(); ++k) {
    std::ostringstream os;
    os << kSliceCsvHeader << '\n';
    std::size_t cells = 0;
    for (std::size_t j = 0; j < r.slices[k].size(); ++j) {
      Interval const& iv = r.slices[k][j];
      if (iv.empty()) continue;
      ++cells;
      os << format_double(r.grid.tau_at(j)) << ',' << format_double(iv.lo)
         << ',' << format_double(iv.hi) << '\n';
    }
    char name[32];
    std::snprintf(name, sizeof name, "slice_%05zu.csv", k);
    index << k << ',' << format_double(r.grid.eta_at(k)) << ',' << cells << ','
          << name << '\n';
    files.emplace_back(dir / name, os.str());
  }
  atomic_write(dir / "index.csv", index.str());
  written.push_back(dir / "index.csv");
  for (auto const& [path, text] : files) {
    atomic_write(path, text);
    written.push_back(path);
  }
  return written;
}

// ---------------------------------------------------------------------------
// JSON

inline Json to_json(Point3 const& p) { return Json::array({p.xi, p.eta, p.tau}); }

inline Json to_json(GridSpec const& g) {
  return {{"eta_min", g.eta_min}, {"eta_max", g.eta_max}, {"n_eta", g.n_eta},
          {"tau_min", g.tau_min}, {"tau_max", g.tau_max}, {"n_tau", g.n_tau},
          {"xi_clip", g.xi_clip}};
}

inline Json to_json(BoundingBox const& b, double xi_clip) {
  return {{"xi", {clip(b.xi_min, xi_clip), clip(b.xi_max, xi_clip)}},
          {"eta", {b.eta_min, b.eta_max}},
          {"tau", {b.tau_min, b.tau_max}}};
}

// Slices list the non-empty cells of each eta node as [tau, L, U].
inline Json to_json(DiamondResult const& r, bool with_slices = true) {
  Json j = {{"grid", to_json(r.grid)},
            {"p1", to_json(r.p1)},
            {"p2", to_json(r.p2)},
            {"verdict", to_string(r.verdict)},
            {"cell_count", r.cell_count},
            {"max_abs_x", r.max_abs_x},
            {"volume", diamond_volume(r)}};
  if (r.cell_count > 0) j["bbox"] = to_json(r.bbox, r.grid.xi_clip);
  if (!with_slices) return j;
  Json slices = Json::array();
  for (std::size_t k = 0; k < r.slices.size(); ++k) {
    Json cells = Json::array();
    for (std::size_t t = 0; t < r.slices[k].size(); ++t) {
      Interval const& iv = r.slices[k][t];
      if (iv.empty()) continue;
      cells.push_back({r.grid.tau_at(t), clip(iv.lo, r.grid.xi_clip),
                       clip(iv.hi, r.grid.xi_clip)});
    }
    if (!cells.empty()) {
      slices.push_back({{"eta", r.grid.eta_at(k)}, {"cells", std::move(cells)}});
    }
  }
  j["slices"] = std::move(slices);
  return j;
}

inline Json to_json(Lemma2Certificate const& c) {
  return {{"eps", c.eps}, {"c1", c.c1},   {"c2", c.c2},
          {"eta2", c.eta2}, {"x1", c.x1}, {"x2", c.x2},
          {"d", c.d},     {"R", c.R},     {"D", c.D},
          {"tau_max", c.tau_max}, {"xi_max", c.xi_max}};
}

inline Json to_json(CompactnessReport const& r) {
  return {{"status", to_string(r.status)},
          {"reason", r.reason},
          {"max_abs_x", r.max_abs_x},
          {"d", r.d},
          {"tau_extent", r.tau_extent},
          {"tau_max", r.tau_max},
          {"xi_extent", r.xi_extent},
          {"xi_max", r.xi_max},
          {"cells", r.cells},
          {"cells_doubled", r.cells_doubled},
          {"cell_change", r.cell_change}};
}

inline Json to_json(CausalImageReport const& r) {
  Json j = {{"map", r.map},
            {"n_curves", r.n_curves},
            {"n_segments", r.n_segments},
            {"n_source_causal", r.n_source_causal},
            {"n_image_causal", r.n_image_causal},
            {"fraction_causal", r.fraction_causal},
            {"worst_margin", r.worst_margin},
            {"max_violation", r.max_violation},
            {"worst_curve", r.worst_curve},
            {"worst_segment", r.worst_segment},
            {"worst_tau", r.worst_tau}};
  if (r.min_radial_gap) j["min_radial_gap"] = *r.min_radial_gap;
  return j;
}

inline Json to_json(ScalingComparison const& s) {
  return {{"C", s.C},
          {"direct", to_json(s.direct, false)},
          {"scaled", to_json(s.scaled, false)},
          {"slice_symmetric_difference", s.slice_symmetric_difference},
          {"total_symmetric_difference", s.total_symmetric_difference},
          {"max_interval_discrepancy", s.max_interval_discrepancy},
          {"mapped_bbox", to_json(s.mapped_bbox, s.direct.grid.xi_clip)},
          {"sigma_of_bbox", to_json(s.sigma_of_bbox, s.direct.grid.xi_clip)}};
}

inline Json to_json(GradReport const& r) {
  return {{"grid",
           {{"xi_min", r.grid.xi_min}, {"xi_max", r.grid.xi_max},
            {"n_xi", r.grid.n_xi}, {"tau_min", r.grid.tau_min},
            {"tau_max", r.grid.tau_max}, {"n_tau", r.grid.n_tau}}},
          {"max_norm_sq", r.max_norm_sq},
          {"argmax", {r.argmax_xi, r.argmax_tau}},
          {"max_ode_residual", r.max_ode_residual},
          {"max_ineq3_residual", r.max_ineq3_residual},
          {"pass", r.pass}};
}

inline Json to_json(EscapeReport const& r) {
  Json hist = Json::array();
  for (auto const& [cut, eta] : r.refinement_history) hist.push_back({cut, eta});
  Json j = {{"escaped", r.escaped},
            {"eta_budget", r.eta_budget},
            {"tau_reached", r.tau_reached},
            {"refinement_history", std::move(hist)}};
  j["eta_at_escape"] = r.eta_at_escape ? Json(*r.eta_at_escape) : Json(nullptr);
  return j;
}

}  // namespace ppwave

#endif  // PPWAVE_IO_HPP_
