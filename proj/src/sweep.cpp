#include "magspec/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "magspec/errors.hpp"

namespace magspec {

const char* const kFiniteDomainCaveat =
    "finite-domain heuristic: values are computed on a bounded box and a bounded set of centers; growth "
    "along the sweep is evidence about, not a proof of, discreteness of the spectrum on R^n";

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("quantity parameter '" + key + "' is not a number: '" + v + "'");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string Quantity::name() const {
  switch (kind) {
    case QuantityKind::Lambda: return "lambda";
    case QuantityKind::Mu: return "mu";
    case QuantityKind::Veff: {
      std::string s = std::string("veff:") + to_string(veff.variant) + ":" + veff.params_string();
      if (veff.probe) s += ":probe";
      return s;
    }
    case QuantityKind::Molchanov: return "molchanov:c=" + fmt(c);
    case QuantityKind::Sublevel: {
      std::string s = "sublevel:A=" + fmt(A);
      if (use_veff) s += ":veff=" + std::string(to_string(veff.variant)) + ";" + veff.params_string();
      return s;
    }
  }
  return "?";
}

Quantity parse_quantity(const std::string& text) {
  Quantity q;
  const auto parts = split(text, ':');
  const std::string& head = parts[0];
  auto apply_veff_param = [&](const std::string& key, const std::string& val) -> bool {
    if (key == "delta") q.veff.delta = parse_number(key, val);
    else if (key == "eps") q.veff.eps = parse_number(key, val);
    else if (key == "r") q.veff.r = parse_number(key, val);
    else if (key == "mode") q.veff.mode = majorant_mode_from_string(val);
    else if (key == "density") q.veff.sampling.density = parse_number(key, val);
    else return false;
    return true;
  };
  if (head == "lambda" || head == "mu") {
    if (parts.size() != 1) throw ConfigError("quantity '" + head + "' takes no parameters");
    q.kind = head == "lambda" ? QuantityKind::Lambda : QuantityKind::Mu;
    return q;
  }
  if (head == "veff") {
    if (parts.size() < 2) throw ConfigError("veff quantity needs a variant, e.g. veff:twod:delta=1");
    q.kind = QuantityKind::Veff;
    q.veff.variant = effective_variant_from_string(parts[1]);
    for (std::size_t i = 2; i < parts.size(); ++i) {
      if (parts[i] == "probe") {
        q.veff.probe = true;
        continue;
      }
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos || !apply_veff_param(parts[i].substr(0, eq), parts[i].substr(eq + 1)))
        throw ConfigError("unknown veff parameter '" + parts[i] + "'");
    }
    if (q.veff.probe && q.veff.variant != EffectiveVariant::TwoD)
      throw ConfigError("probe mode is only available for the twod variant");
    q.veff.validate();
    return q;
  }
  if (head == "molchanov") {
    q.kind = QuantityKind::Molchanov;
    bool have_c = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos || parts[i].substr(0, eq) != "c")
        throw ConfigError("unknown molchanov parameter '" + parts[i] + "'");
      q.c = parse_number("c", parts[i].substr(eq + 1));
      have_c = true;
    }
    if (!have_c) throw ConfigError("molchanov quantity needs c=<value>");
    if (!(q.c > 0.0)) throw ParameterError("molchanov c must be positive");
    return q;
  }
  if (head == "sublevel") {
    q.kind = QuantityKind::Sublevel;
    bool have_A = false;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos) throw ConfigError("malformed sublevel parameter '" + parts[i] + "'");
      const std::string key = parts[i].substr(0, eq), val = parts[i].substr(eq + 1);
      if (key == "A") {
        q.A = parse_number(key, val);
        have_A = true;
      } else if (key == "veff") {
        q.use_veff = true;
        const auto sub = split(val, ';');
        q.veff.variant = effective_variant_from_string(sub[0]);
        for (std::size_t j = 1; j < sub.size(); ++j) {
          const auto e2 = sub[j].find('=');
          if (e2 == std::string::npos || !apply_veff_param(sub[j].substr(0, e2), sub[j].substr(e2 + 1)))
            throw ConfigError("unknown veff parameter '" + sub[j] + "'");
        }
        q.veff.validate();
      } else {
        throw ConfigError("unknown sublevel parameter '" + key + "'");
      }
    }
    if (!have_A) throw ConfigError("sublevel quantity needs A=<value>");
    return q;
  }
  throw ConfigError("unknown quantity '" + head + "' (lambda, mu, veff, molchanov, sublevel)");
}

void SweepPlan::validate_and_sort() {
  if (!(r > 0.0)) throw ParameterError("sweep radius must be positive");
  if (centers.empty()) throw ParameterError("sweep has no centers");
  if (quantities.empty()) throw ParameterError("sweep has no quantities");
  if (!(growth_factor > 1.0)) throw ParameterError("growth factor must exceed 1");
  if (spec.dim != grid.dim()) throw ParameterError("field and grid dimensions differ");
  for (const auto& c : centers) (void)nodes_in_ball(grid, BallRegion(c, r));
  const int dim = grid.dim();
  std::stable_sort(centers.begin(), centers.end(), [dim](const Point& a, const Point& b) {
    return norm(a, dim) < norm(b, dim);
  });
}

std::vector<Point> default_centers(const Grid& grid, double r, std::optional<double> step) {
  const int dim = grid.dim();
  const double s = step.value_or(0.5 * r);
  if (!(s > 0.0)) throw ParameterError("center spacing must be positive");
  const Point lo = grid.box_min(), hi = grid.box_max();
  Point origin{};
  bool inside = true;
  for (int i = 0; i < dim; ++i) inside = inside && lo[i] + r <= 0.0 && 0.0 <= hi[i] - r;
  if (!inside)
    for (int i = 0; i < dim; ++i) origin[i] = 0.5 * (lo[i] + hi[i]);
  auto fits = [&](const Point& c) {
    for (int i = 0; i < dim; ++i)
      if (c[i] - r < lo[i] - 1e-12 || c[i] + r > hi[i] + 1e-12) return false;
    return true;
  };
  std::vector<Point> dirs;
  for (int i = 0; i < dim; ++i)
    for (int sg : {1, -1}) {
      Point d{};
      d[i] = sg;
      dirs.push_back(d);
    }
  const int combos = 1 << dim;
  for (int m = 0; m < combos; ++m) {
    Point d{};
    for (int i = 0; i < dim; ++i) d[i] = ((m >> i) & 1 ? -1.0 : 1.0) / std::sqrt(double(dim));
    dirs.push_back(d);
  }
  std::vector<Point> out;
  if (fits(origin)) out.push_back(origin);
  for (const auto& d : dirs)
    for (int k = 1;; ++k) {
      Point c = origin;
      for (int i = 0; i < dim; ++i) c[i] += k * s * d[i];
      if (!fits(c)) break;
      out.push_back(c);
    }
  std::stable_sort(out.begin(), out.end(), [dim](const Point& a, const Point& b) { return norm(a, dim) < norm(b, dim); });
  return out;
}

const char* to_string(Conclusion c) {
  switch (c) {
    case Conclusion::SuggestsDiscrete: return "suggests-discrete";
    case Conclusion::SuggestsNonDiscrete: return "suggests-non-discrete";
    case Conclusion::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict make_verdict(const std::vector<std::string>& names, const std::vector<SweepRow>& rows, double g) {
  Verdict v;
  v.growth_factor = g;
  std::size_t growing = 0, with_data = 0;
  for (std::size_t qi = 0; qi < names.size(); ++qi) {
    QuantityEvidence ev;
    ev.quantity = names[qi];
    std::vector<std::pair<double, double>> pts;  // (distance, value)
    for (const auto& row : rows)
      if (qi < row.values.size() && row.values[qi]) pts.emplace_back(row.distance, *row.values[qi]);
    if (pts.size() >= 2) {
      std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
      const double dmax = pts.back().first;
      const double inf = std::numeric_limits<double>::infinity();
      double imin = inf, omin = inf;
      for (const auto& [d, val] : pts) {
        if (d <= dmax / 3.0 + 1e-12) {
          imin = std::min(imin, val);
          ++ev.inner_count;
        }
        if (d >= 2.0 * dmax / 3.0 - 1e-12) {
          omin = std::min(omin, val);
          ++ev.outer_count;
        }
      }
      if (ev.inner_count == 0 || ev.outer_count == 0) {
        const std::size_t third = std::max<std::size_t>(1, pts.size() / 3);
        imin = omin = inf;
        ev.inner_count = ev.outer_count = third;
        for (std::size_t i = 0; i < third; ++i) {
          imin = std::min(imin, pts[i].second);
          omin = std::min(omin, pts[pts.size() - 1 - i].second);
        }
      }
      ev.inner_min = imin;
      ev.outer_min = omin;
      ev.has_data = true;
      if (imin > 0.0) ev.grows = omin > g * imin;
      else ev.grows = omin - imin > (g - 1.0) * std::max(std::abs(imin), 1.0);
      ++with_data;
      if (ev.grows) ++growing;
    }
    v.evidence.push_back(ev);
  }
  if (with_data == names.size() && with_data > 0) {
    if (growing == with_data) v.conclusion = Conclusion::SuggestsDiscrete;
    else if (growing == 0) v.conclusion = Conclusion::SuggestsNonDiscrete;
    else {
      v.conclusion = Conclusion::Inconclusive;
      v.conflict = true;
    }
  } else if (growing > 0 && growing < with_data) {
    v.conflict = true;
  }
  return v;
}

SweepReport run_sweep(SweepPlan plan) {
  plan.validate_and_sort();
  const int dim = plan.grid.dim();
  SweepReport rep;
  rep.r = plan.r;
  rep.dim = dim;
  for (const auto& q : plan.quantities) rep.quantity_names.push_back(q.name());

  // shared V_eff evaluators (AHS precomputes its covering once)
  std::vector<std::shared_ptr<EffectivePotential>> veffs(plan.quantities.size());
  for (std::size_t qi = 0; qi < plan.quantities.size(); ++qi) {
    const auto& q = plan.quantities[qi];
    if (q.kind == QuantityKind::Veff || (q.kind == QuantityKind::Sublevel && q.use_veff))
      veffs[qi] = std::make_shared<EffectivePotential>(plan.spec, q.veff, plan.grid);
  }

  const std::size_t n = plan.centers.size();
  rep.rows.resize(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> violations{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      SweepRow& row = rep.rows[i];
      row.center = plan.centers[i];
      row.distance = norm(row.center, dim);
      row.values.assign(plan.quantities.size(), std::nullopt);
      const BallRegion ball(row.center, plan.r);
      std::optional<double> lam, mu;
      std::vector<std::string> errs;
      SolverOptions so = plan.solver;
      so.k = 1;
      so.want_vectors = false;
      auto bottom = [&](Boundary bc) {
        return smallest_eigs(assemble(plan.grid, plan.spec, ball, bc), so).eigenvalues.front();
      };
      for (std::size_t qi = 0; qi < plan.quantities.size(); ++qi) {
        const auto& q = plan.quantities[qi];
        try {
          switch (q.kind) {
            case QuantityKind::Lambda:
              if (!lam) lam = bottom(Boundary::Dirichlet);
              row.values[qi] = lam;
              break;
            case QuantityKind::Mu:
              if (!mu) mu = bottom(Boundary::Neumann);
              row.values[qi] = mu;
              break;
            case QuantityKind::Veff:
              row.values[qi] = (*veffs[qi])(row.center);
              break;
            case QuantityKind::Molchanov:
              row.values[qi] = molchanov_functional(plan.grid, plan.spec.V, ball, q.c, plan.molchanov).value;
              break;
            case QuantityKind::Sublevel: {
              if (q.use_veff) {
                const auto ev = veffs[qi];
                row.values[qi] = sublevel_measure(plan.grid, [ev](const Point& x) { return (*ev)(x); }, ball, q.A);
              } else {
                row.values[qi] = sublevel_measure(plan.grid, plan.spec.V, ball, q.A);
              }
              break;
            }
          }
        } catch (const Error& e) {
          errs.push_back(rep.quantity_names[qi] + ": " + e.what());
        }
      }
      if (lam && mu && *mu > *lam + 10.0 * plan.solver.tol * std::max(1.0, std::abs(*lam))) {
        ++violations;
        errs.push_back("mu exceeds lambda");
      }
      for (std::size_t e = 0; e < errs.size(); ++e) row.error += (e ? "; " : "") + errs[e];
    }
  };
  const int jobs = std::max(1, plan.jobs);
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  rep.mu_lambda_violations = violations.load();
  rep.verdict = make_verdict(rep.quantity_names, rep.rows, plan.growth_factor);
  return rep;
}

}  // namespace magspec
