#include "plrecon/probes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plr {

namespace {

// quintic ramp s(t) = t^3 (10 - 15 t + 6 t^2), C^2 with flat ends
inline double ramp(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
inline double ramp_d(double t) {
  double omt = 1.0 - t;
  return 30.0 * t * t * omt * omt;
}

// bump phi(y) = exp(-y^2 / (1 - y^2)) on [0,1)
inline double bump(double y) {
  double d = 1.0 - y * y;
  if (d <= 1e-14) return 0.0;
  return std::exp(-y * y / d);
}
inline double bump_d(double y) {
  double d = 1.0 - y * y;
  if (d <= 1e-14) return 0.0;
  return bump(y) * (-2.0 * y) / (d * d);
}

}  // namespace

double Cutoff::value(double r) const {
  if (r <= r_flat) return 1.0;
  if (r >= 1.0) return 0.0;
  return bump(ramp((r - r_flat) / (1.0 - r_flat)));
}

double Cutoff::deriv(double r) const {
  if (r <= r_flat || r >= 1.0) return 0.0;
  double t = (r - r_flat) / (1.0 - r_flat);
  return bump_d(ramp(t)) * ramp_d(t) / (1.0 - r_flat);
}

double ProbeFrame::eta4_deriv(double y) const {
  double d = eta4_amp * eta.deriv(std::abs(y));
  return y < 0.0 ? -d : d;
}

ProbeFrame ProbeFrame::make(CutoffShape s) {
  ProbeFrame f;
  f.shape = s;
  double r_flat = (s == CutoffShape::FlatTop) ? 0.5 : 0.35;
  f.eta = Cutoff{r_flat};
  f.xi = Cutoff{r_flat};
  // boundary-slice normalizations (even integrands, so twice the half line)
  f.c_eta = 2.0 * integrate_1d([&](double r) {
    double b = f.eta.value(r);
    return b * b;
  }, 0.0, 1.0, 20001);
  f.eta4_amp = 1.0 / std::sqrt(f.c_eta);
  if (!(f.eta4_amp <= 1.0 + 1e-12))
    throw std::logic_error("cutoff normalization exceeds the sup bound");
  f.int_grad_eta4 = 2.0 * f.eta4_amp * f.eta4_amp * integrate_1d([&](double r) {
    double d = f.eta.deriv(r);
    return d * d;
  }, 0.0, 1.0, 20001);
  return f;
}

void check_resolvable(const Grid& g, double support, double N) {
  if (N * g.hmax() > 0.5) {
    double h_need = 0.5 / N;
    int n1_need = (int)std::ceil((g.x1_max - g.x1_min) / h_need) + 1;
    int n2_need = (int)std::ceil(g.x2_max / h_need) + 1;
    std::ostringstream os;
    os << "frequency N=" << N << " is unresolvable: N*hmax=" << N * g.hmax()
       << " > 0.5; need spacing <= " << h_need << ", i.e. at least " << n1_need
       << " x " << n2_need << " nodes on this domain";
    throw ResolvabilityError(os.str());
  }
  double room = std::min({-g.x1_min, g.x1_max, g.x2_max});
  if (support > room * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "probe support radius " << support << " exceeds the domain margin "
       << room << " around x0; shrink the support or enlarge the domain";
    throw ResolvabilityError(os.str());
  }
}

ScalarField make_w0(const ProbeFrame& f, const Grid& g, double M, double N) {
  if (!(M > 0.0) || !(N > 0.0)) throw std::invalid_argument("make_w0: M, N must be positive");
  check_resolvable(g, 1.0 / M, N);
  return ScalarField::from_fn(g, [&](double x1, double x2) {
    double b = f.eta.value(M * std::hypot(x1, x2));
    if (b == 0.0) return Cplx(0.0, 0.0);
    double a = std::exp(-N * x2);
    return Cplx(b * a * std::cos(N * x1), b * a * std::sin(N * x1));
  });
}

VectorField w0_gradient(const ProbeFrame& f, const Grid& g, double M, double N) {
  VectorField v(g);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      double x1 = g.x1(i), x2 = g.x2(j);
      double r = std::hypot(x1, x2);
      double b = f.eta.value(M * r), db = f.eta.deriv(M * r);
      std::size_t k = g.idx(i, j);
      if (b == 0.0 && db == 0.0) {
        v.c1[k] = v.c2[k] = 0.0;
        continue;
      }
      double a = std::exp(-N * x2);
      Cplx E(a * std::cos(N * x1), a * std::sin(N * x1));
      double rad1 = 0.0, rad2 = 0.0;
      if (r > 0.0) {
        rad1 = M * db * x1 / r;
        rad2 = M * db * x2 / r;
      }
      v.c1[k] = (Cplx(rad1, 0) + Cplx(0, N) * b) * E;
      v.c2[k] = (Cplx(rad2, 0) - Cplx(N, 0) * b) * E;
    }
  return v;
}

UMParts make_uM_parts(const ProbeFrame& f, const ConductivityContext& ctx,
                      double M, double N) {
  const Grid& g = ctx.grid();
  UMParts out;
  out.M = M;
  out.N = N;
  out.C = std::sqrt(M / (N * f.c_eta));
  out.w0 = make_w0(f, g, M, N);
  out.w1 = ctx.solve_corrector(out.w0);
  out.uM = scale(add(out.w0, out.w1), Cplx(out.C, 0));
  out.g_probe = w0_gradient(f, g, M, N);
  for (auto& c : out.g_probe.c1) c *= out.C;
  for (auto& c : out.g_probe.c2) c *= out.C;
  return out;
}

ScalarField make_uM(const ProbeFrame& f, const ScalarField& sigma, double M,
                    double N) {
  ConductivityContext ctx(sigma.grid, sigma);
  return make_uM_parts(f, ctx, M, N).uM;
}

namespace {

// xi(sqrt(N) x2) * eta4(sqrt(N) x1) * exp(i omega x1 - omega x2) and its
// exact gradient
void osc_field(const ProbeFrame& f, const Grid& g, double N, double omega,
               ScalarField& val, VectorField& grad) {
  double rtN = std::sqrt(N);
  val = ScalarField(g);
  grad = VectorField(g);
  for (int j = 0; j < g.n2; ++j)
    for (int i = 0; i < g.n1; ++i) {
      double x1 = g.x1(i), x2 = g.x2(j);
      double e4 = f.eta4(rtN * x1), de4 = f.eta4_deriv(rtN * x1);
      double xv = f.xi.value(rtN * x2), dxv = f.xi.deriv(rtN * x2);
      std::size_t k = g.idx(i, j);
      if (e4 == 0.0 && de4 == 0.0) continue;
      double a = std::exp(-omega * x2);
      Cplx E(a * std::cos(omega * x1), a * std::sin(omega * x1));
      val.v[k] = xv * e4 * E;
      grad.c1[k] = (rtN * de4 + Cplx(0, omega) * e4) * xv * E;
      grad.c2[k] = (rtN * dxv * e4 - omega * xv * e4) * E;
    }
}

}  // namespace

OscParts make_osc_probes(const ProbeFrame& f, const Grid& g, double N) {
  check_resolvable(g, 1.0 / std::sqrt(N), N);
  OscParts out;
  out.N = N;
  osc_field(f, g, N, 0.5 * N, out.v2, out.g2_probe);
  osc_field(f, g, N, N, out.v3, out.g3_probe);
  out.u2 = out.v2;
  out.u3 = out.v3;
  return out;
}

OscParts make_osc_parts(const ProbeFrame& f, const ConductivityContext& ctx,
                        double N) {
  OscParts out = make_osc_probes(f, ctx.grid(), N);
  out.s = ctx.solve_corrector(out.v2);
  out.r = ctx.solve_corrector(out.v3);
  out.u2 = add(out.v2, out.s);
  out.u3 = add(out.v3, out.r);
  return out;
}

std::pair<ScalarField, ScalarField> make_osc_pair(const ProbeFrame& f,
                                                  const ScalarField& sigma,
                                                  double N) {
  ConductivityContext ctx(sigma.grid, sigma);
  OscParts p = make_osc_parts(f, ctx, N);
  return {std::move(p.u2), std::move(p.u3)};
}

std::vector<MNSchedule::Point> MNSchedule::generate(const Grid& g,
                                                    std::string* warnings) const {
  if (!(n_exponent > 1.0))
    throw std::invalid_argument("MNSchedule: n_exponent must exceed 1 so N(M)/M grows");
  std::vector<double> ms = m_values;
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  double room = std::min({-g.x1_min, g.x1_max, g.x2_max});
  std::vector<Point> out;
  for (double M : ms) {
    double N = std::pow(M, n_exponent);
    std::ostringstream why;
    if (!(M > 0.0))
      why << "M must be positive";
    else if (1.0 / M <= 4.0 * g.hmax())
      why << "support 1/M=" << 1.0 / M << " needs > 4 spacings (4*hmax=" << 4.0 * g.hmax() << ")";
    else if (1.0 / M > room * (1.0 + 1e-12))
      why << "support 1/M=" << 1.0 / M << " exceeds domain margin " << room;
    else if (N * g.hmax() > margin)
      why << "N=" << N << " oscillates beyond margin: N*hmax=" << N * g.hmax() << " > " << margin;
    if (why.str().empty()) {
      out.push_back({M, N});
    } else if (warnings) {
      std::ostringstream line;
      line << "skipped M=" << M << ": " << why.str() << "\n";
      *warnings += line.str();
    }
  }
  return out;
}

MNSchedule MNSchedule::geometric(double m0, double ratio, int count) {
  MNSchedule s;
  double m = m0;
  for (int i = 0; i < count; ++i, m *= ratio) s.m_values.push_back(m);
  return s;
}

std::vector<double> filter_frequencies(const Grid& g, const std::vector<double>& n_values,
                                       double margin, std::string* warnings) {
  std::vector<double> ns = n_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  double room = std::min({-g.x1_min, g.x1_max, g.x2_max});
  std::vector<double> out;
  for (double N : ns) {
    std::ostringstream why;
    if (!(N > 0.0))
      why << "N must be positive";
    else if (N * g.hmax() > margin)
      why << "N*hmax=" << N * g.hmax() << " > " << margin;
    else if (1.0 / std::sqrt(N) > room * (1.0 + 1e-12))
      why << "support 1/sqrt(N)=" << 1.0 / std::sqrt(N) << " exceeds domain margin " << room;
    else if (1.0 / std::sqrt(N) <= 4.0 * g.hmax())
      why << "support 1/sqrt(N) needs > 4 spacings";
    if (why.str().empty()) {
      out.push_back(N);
    } else if (warnings) {
      std::ostringstream line;
      line << "skipped N=" << N << ": " << why.str() << "\n";
      *warnings += line.str();
    }
  }
  return out;
}

}  // namespace plr
