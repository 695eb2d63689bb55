#include "sps/linear_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "sps/errors.hpp"
#include "sps/mode_solver.hpp"
#include "sps/numerics.hpp"

namespace sps {

namespace {

// p / (beta r + t r^xi) without forming r^xi for tiny r.
double coupling(const Params& q, double t, double r) {
  return q.p / (r * (q.beta + t * std::exp((q.xi - 1.0) * std::log(r))));
}

double relative(const std::vector<double>& res, const RadialGrid& g, double sigma, double scale) {
  const double nr = norm_Y(res, g, sigma);
  return scale > 0.0 ? nr / scale : nr;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> coupled_residual(
    const Params& params, double t, const RadialField& phi, const RadialField& psi,
    const CoupledRHS& rhs) {
  require_same_grid(phi, psi);
  require_same_grid(phi, rhs.f);
  require_same_grid(phi, rhs.g);
  if (!phi.has_deriv() || !psi.has_deriv()) {
    throw Error(ErrorCode::missing_derivative, "coupled residual needs phi' and psi'");
  }
  const auto& g = *phi.grid;
  const double h = g.log_step();
  const auto dphi = numerics::log_derivative(phi.deriv, h);
  const auto dpsi = numerics::log_derivative(psi.deriv, h);
  std::vector<double> r1(g.size()), r2(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g[j];
    const double c = coupling(params, t, r);
    r1[j] = -dphi[j] / r - (params.n_dim - 1.0) * phi.deriv[j] / r + c * psi.deriv[j] -
            rhs.f.values[j];
    r2[j] = -dpsi[j] / r - (params.n_dim - 1.0) * psi.deriv[j] / r + c * phi.deriv[j] -
            rhs.g.values[j];
  }
  return {std::move(r1), std::move(r2)};
}

CoupledSolution solve_coupled(const Params& params, double t, const CoupledRHS& rhs) {
  require_same_grid(rhs.f, rhs.g);
  const auto big_f = combine(1.0, rhs.f, 1.0, rhs.g);
  const auto big_g = combine(1.0, rhs.f, -1.0, rhs.g);

  const auto s1 = solve_k0({params, 0, Sign::plus, t}, big_f);
  const auto s2 = solve_k0({params, 0, Sign::minus, t}, big_g);

  CoupledSolution out;
  out.zeta1 = s1.a;
  out.zeta2 = s2.a;
  out.anchor = s1.anchor;
  out.phi = combine(0.5, s1.a, 0.5, s2.a);
  out.psi = combine(0.5, s1.a, -0.5, s2.a);

  const double ny_f = norm_Y(rhs.f, params.sigma);
  const double ny_g = norm_Y(rhs.g, params.sigma);
  const double nx = norm_X(out.phi, params.sigma) + norm_X(out.psi, params.sigma);
  out.stability_ratio = ny_f + ny_g > 0.0 ? nx / (ny_f + ny_g) : 0.0;

  const auto [r1, r2] = coupled_residual(params, t, out.phi, out.psi, rhs);
  const double scale = std::max(ny_f, ny_g);
  out.residual_1 = relative(r1, *rhs.f.grid, params.sigma, scale);
  out.residual_2 = relative(r2, *rhs.f.grid, params.sigma, scale);
  return out;
}

StabilityReport stability_sweep(const Params& params, const std::vector<double>& t_list,
                                const std::vector<CoupledRHS>& rhs_family) {
  if (t_list.empty() || rhs_family.empty()) {
    throw Error(ErrorCode::invalid_argument, "stability_sweep needs nonempty t and rhs lists");
  }
  StabilityReport rep;
  rep.entries.resize(t_list.size() * rhs_family.size());
  detail::parallel_for(rep.entries.size(), [&](std::size_t i) {
    const std::size_t ti = i / rhs_family.size();
    const std::size_t mi = i % rhs_family.size();
    const auto& rhs = rhs_family[mi];
    const auto sol = solve_coupled(params, t_list[ti], rhs);
    auto& e = rep.entries[i];
    e.t = t_list[ti];
    e.member = mi;
    e.norm_Y_f = norm_Y(rhs.f, params.sigma);
    e.norm_Y_g = norm_Y(rhs.g, params.sigma);
    e.norm_X_phi = norm_X(sol.phi, params.sigma);
    e.norm_X_psi = norm_X(sol.psi, params.sigma);
    e.ratio = sol.stability_ratio;
    e.residual_1 = sol.residual_1;
    e.residual_2 = sol.residual_2;
  });
  rep.max_ratio = 0.0;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& e : rep.entries) {
    rep.max_ratio = std::max(rep.max_ratio, e.ratio);
    rep.min_ratio = std::min(rep.min_ratio, e.ratio);
  }
  rep.spread = rep.min_ratio > 0.0 ? rep.max_ratio / rep.min_ratio
                                   : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace sps
