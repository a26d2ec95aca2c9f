#include "magspec/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "magspec/config.hpp"

namespace magspec {

ojson meta_json(const ArtifactMeta& meta) {
  ojson j = ojson::object();
  j["tool"] = "magspec";
  j["version"] = tool_version();
  j["command"] = meta.command;
  j["seed"] = meta.seed;
  j["config_hash"] = meta.config_hash;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

namespace {

ojson number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<std::string> meta_values(const ArtifactMeta& meta) {
  return {std::to_string(meta.seed), meta.config_hash, tool_version()};
}

}  // namespace

ojson spectral_json(const SpectralResult& r, const ArtifactMeta& meta) {
  ojson j = ojson::object();
  j["meta"] = meta_json(meta);
  j["method"] = r.method;
  j["iterations"] = r.iterations;
  ojson ev = ojson::array(), res = ojson::array();
  for (double v : r.eigenvalues) ev.push_back(number_or_null(v));
  for (double v : r.residuals) res.push_back(number_or_null(v));
  j["eigenvalues"] = ev;
  j["residuals"] = res;
  return j;
}

std::string spectral_csv(const SpectralResult& r, const ArtifactMeta& meta) {
  std::string out = csv_line({"index", "eigenvalue", "residual", "seed", "config_hash", "version"});
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    std::vector<std::string> f{std::to_string(i), format_double(r.eigenvalues[i]), format_double(r.residuals[i])};
    for (auto& m : meta_values(meta)) f.push_back(m);
    out += csv_line(f);
  }
  return out;
}

ojson sweep_json(const SweepReport& rep, const ArtifactMeta& meta) {
  ojson j = ojson::object();
  j["meta"] = meta_json(meta);
  j["caveat"] = rep.verdict.caveat;
  j["dim"] = rep.dim;
  j["r"] = rep.r;
  j["quantities"] = rep.quantity_names;
  ojson rows = ojson::array();
  for (const auto& row : rep.rows) {
    ojson o = ojson::object();
    ojson c = ojson::array();
    for (int i = 0; i < rep.dim; ++i) c.push_back(row.center[i]);
    o["center"] = c;
    o["distance"] = row.distance;
    ojson vals = ojson::object();
    for (std::size_t q = 0; q < rep.quantity_names.size(); ++q)
      vals[rep.quantity_names[q]] = row.values[q] ? number_or_null(*row.values[q]) : ojson(nullptr);
    o["values"] = vals;
    if (!row.error.empty()) o["error"] = row.error;
    rows.push_back(o);
  }
  j["rows"] = rows;
  ojson v = ojson::object();
  v["conclusion"] = to_string(rep.verdict.conclusion);
  v["conflict"] = rep.verdict.conflict;
  v["growth_factor"] = rep.verdict.growth_factor;
  ojson ev = ojson::array();
  for (const auto& e : rep.verdict.evidence) {
    ojson o = ojson::object();
    o["quantity"] = e.quantity;
    o["has_data"] = e.has_data;
    o["inner_count"] = e.inner_count;
    o["outer_count"] = e.outer_count;
    o["inner_min"] = e.has_data ? number_or_null(e.inner_min) : ojson(nullptr);
    o["outer_min"] = e.has_data ? number_or_null(e.outer_min) : ojson(nullptr);
    o["grows"] = e.grows;
    ev.push_back(o);
  }
  v["evidence"] = ev;
  v["caveat"] = rep.verdict.caveat;
  j["verdict"] = v;
  j["mu_lambda_violations"] = rep.mu_lambda_violations;
  return j;
}

std::string sweep_csv(const SweepReport& rep, const ArtifactMeta& meta) {
  std::vector<std::string> head;
  for (int i = 0; i < rep.dim; ++i) head.push_back("x" + std::to_string(i + 1));
  head.push_back("distance");
  for (const auto& q : rep.quantity_names) head.push_back(q);
  for (const char* m : {"error", "seed", "config_hash", "version"}) head.push_back(m);
  std::string out = csv_line(head);
  for (const auto& row : rep.rows) {
    std::vector<std::string> f;
    for (int i = 0; i < rep.dim; ++i) f.push_back(format_double(row.center[i]));
    f.push_back(format_double(row.distance));
    for (const auto& v : row.values) f.push_back(v ? format_double(*v) : std::string());
    f.push_back(row.error);
    for (auto& m : meta_values(meta)) f.push_back(m);
    out += csv_line(f);
  }
  return out;
}

std::string sweep_svg(const SweepReport& rep, const ArtifactMeta& meta) {
  const double W = 640, H = 400, L = 70, R = 190, T = 30, B = 50;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& row : rep.rows)
    for (const auto& v : row.values)
      if (v && std::isfinite(*v)) {
        xmin = std::min(xmin, row.distance);
        xmax = std::max(xmax, row.distance);
        ymin = std::min(ymin, *v);
        ymax = std::max(ymax, *v);
      }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else if (c == '"') o += "&quot;";
      else o += c;
    }
    return o;
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<desc>magspec " << tool_version() << " seed=" << meta.seed << " config_hash=" << meta.config_hash << "; "
     << esc(rep.verdict.caveat) << "</desc>\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">|center|</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">value</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << format_double(std::round(xv * 1000) / 1000) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
       << format_double(std::round(yv * 1000) / 1000) << "</text>\n";
  }
  for (std::size_t q = 0; q < rep.quantity_names.size(); ++q) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rep.rows)
      if (row.values[q] && std::isfinite(*row.values[q])) pts.emplace_back(row.distance, *row.values[q]);
    std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
    const char* col = colors[q % 6];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
      os << (i ? " " : "") << format_double(px(pts[i].first)) << "," << format_double(py(pts[i].second));
    os << "\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (q + 1) << "\" font-size=\"11\" fill=\"" << col << "\">"
       << esc(rep.quantity_names[q]) << "</text>\n";
  }
  os << "<text x=\"" << L << "\" y=\"18\" font-size=\"12\">verdict: " << to_string(rep.verdict.conclusion)
     << (rep.verdict.conflict ? " (conflict)" : "") << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace magspec
