#include "levyhom/quadrature.hpp"

#include <cmath>
#include <cstdlib>

#include "levyhom/errors.hpp"

namespace levyhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 16-point Gauss-Legendre on [-1, 1].
constexpr int kGn = 16;
constexpr double kGx[kGn / 2] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr double kGw[kGn / 2] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss_1d(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kGn / 2; ++i) {
    s += kGw[i] * (f(c - r * kGx[i]) + f(c + r * kGx[i]));
  }
  return s * r;
}

template <class F>
double gauss_2d(const F& f, double x0, double x1, double y0, double y1) {
  const double cx = 0.5 * (x0 + x1), rx = 0.5 * (x1 - x0);
  const double cy = 0.5 * (y0 + y1), ry = 0.5 * (y1 - y0);
  double s = 0.0;
  for (int i = 0; i < kGn / 2; ++i) {
    const double xs[2] = {cx - rx * kGx[i], cx + rx * kGx[i]};
    for (int xi = 0; xi < 2; ++xi) {
      double row = 0.0;
      for (int j = 0; j < kGn / 2; ++j) {
        row += kGw[j] * (f(xs[xi], cy - ry * kGx[j]) + f(xs[xi], cy + ry * kGx[j]));
      }
      s += kGw[i] * row;
    }
  }
  return s * rx * ry;
}

template <class F>
double adaptive_2d(const F& f, double x0, double x1, double y0, double y1,
                   double tol_abs, int depth) {
  const double whole = gauss_2d(f, x0, x1, y0, y1);
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double parts = gauss_2d(f, x0, xm, y0, ym) + gauss_2d(f, xm, x1, y0, ym) +
                       gauss_2d(f, x0, xm, ym, y1) + gauss_2d(f, xm, x1, ym, y1);
  if (std::abs(parts - whole) <= tol_abs || depth >= 30) return parts;
  const double t = tol_abs / 4.0;
  return adaptive_2d(f, x0, xm, y0, ym, t, depth + 1) +
         adaptive_2d(f, xm, x1, y0, ym, t, depth + 1) +
         adaptive_2d(f, x0, xm, ym, y1, t, depth + 1) +
         adaptive_2d(f, xm, x1, ym, y1, t, depth + 1);
}

double exact_pair_1d(int k, double h, double alpha) {
  // Second difference of the double antiderivative of s^(-1-alpha).
  k = std::abs(k);
  const double a = (k - 1) * h, b = k * h, c = (k + 1) * h;
  if (k == 1 && alpha >= 1.0) {
    throw NumericError("exact pair integral diverges for touching cells with alpha >= 1");
  }
  if (alpha == 1.0) return std::log(b * b / (a * c));
  auto pw = [&](double s) { return s > 0.0 ? std::pow(s, 1.0 - alpha) : 0.0; };
  return -(pw(a) - 2.0 * pw(b) + pw(c)) / (alpha * (1.0 - alpha));
}

// Monomial corner integral H(p,q) = int_{[0,a]x[0,b]} u^p v^q |u|^(-2-alpha)
// with p+q > alpha.  The integrand is homogeneous, so dyadic annuli toward
// the corner scale by exactly 2^-(p+q-alpha) and the series sums in closed
// form from the outermost annulus.
double corner_monomial(int p, int q, double a, double b, double alpha) {
  if (static_cast<double>(p + q) <= alpha) {
    throw NumericError("exact pair integral diverges for touching cells with alpha >= 1");
  }
  auto f = [&](double u, double v) {
    double w = std::pow(u * u + v * v, -0.5 * (2.0 + alpha));
    if (p) w *= u;
    if (q) w *= v;
    return w;
  };
  // Outermost annulus [0,a]x[0,b] minus [0,a/2]x[0,b/2], as two rectangles.
  const double annulus = gauss_2d(f, 0.5 * a, a, 0.0, b) + gauss_2d(f, 0.0, 0.5 * a, 0.5 * b, b);
  const double ratio = std::pow(2.0, -(static_cast<double>(p + q) - alpha));
  return annulus / (1.0 - ratio);
}

double exact_pair_2d(int k1, int k2, double h, double alpha) {
  k1 = std::abs(k1);
  k2 = std::abs(k2);
  // Triangle overlap weights along each axis, kinked at the offset center.
  auto tri = [h](double s, double kh) { return h - std::abs(s - kh); };
  auto f = [&](double u, double v) {
    return tri(u, k1 * h) * tri(v, k2 * h) *
           std::pow(u * u + v * v, -0.5 * (2.0 + alpha));
  };

  // Split the supporting rectangle at the kinks; handle each piece.
  const double xs[3] = {(k1 - 1) * h, k1 * h, (k1 + 1) * h};
  const double ys[3] = {(k2 - 1) * h, k2 * h, (k2 + 1) * h};
  double total = 0.0;
  double rough = std::abs(gauss_2d(f, xs[0], xs[2], ys[0], ys[2]));
  if (!(rough > 0.0)) rough = 1.0;
  for (int ix = 0; ix < 2; ++ix) {
    for (int iy = 0; iy < 2; ++iy) {
      const double x0 = xs[ix], x1 = xs[ix + 1], y0 = ys[iy], y1 = ys[iy + 1];
      const bool corner_sing =
          (x0 == 0.0 || x1 == 0.0) && (y0 == 0.0 || y1 == 0.0);
      if (!corner_sing) {
        total += adaptive_2d(f, x0, x1, y0, y1, 1e-12 * rough, 0);
        continue;
      }
      // Reflect onto [0,ax]x[0,ay]; the triangle factors are exactly linear
      // on the piece, so the integral splits into monomial corner integrals.
      const double sx = (x1 == 0.0) ? -1.0 : 1.0;
      const double sy = (y1 == 0.0) ? -1.0 : 1.0;
      const double ax = std::abs(x1 - x0), ay = std::abs(y1 - y0);
      const double cx0 = tri(0.0, k1 * h);
      const double cx1 = tri(sx * ax, k1 * h);
      const double cy0 = tri(0.0, k2 * h);
      const double cy1 = tri(sy * ay, k2 * h);
      const double bx = cx0, mx = (cx1 - cx0) / ax;  // T1 = bx + mx*u
      const double by = cy0, my = (cy1 - cy0) / ay;
      struct Term { double coef; int p, q; };
      const Term terms[4] = {{bx * by, 0, 0}, {bx * my, 0, 1}, {mx * by, 1, 0}, {mx * my, 1, 1}};
      for (const Term& t : terms) {
        if (t.coef == 0.0) continue;
        total += t.coef * corner_monomial(t.p, t.q, ax, ay, alpha);
      }
    }
  }
  return total;
}

}  // namespace

double tail_mass(int dim, double alpha, double r) {
  if (!(r > 0.0)) throw NumericError("tail mass needs a positive radius");
  const double t = std::pow(r, -alpha) / alpha;
  return dim == 1 ? 2.0 * t : 2.0 * kPi * t;
}

double exact_pair_integral(int dim, double alpha, const std::array<int, 2>& k, double h) {
  if (!(h > 0.0)) throw ConfigError("cell size must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (0,2)");
  if (k[0] == 0 && (dim == 1 || k[1] == 0)) {
    throw ConfigError("pair integral is undefined for the zero offset");
  }
  if (dim == 1) return exact_pair_1d(k[0], h, alpha);
  return exact_pair_2d(k[0], k[1], h, alpha);
}

double base_pair_weight(int dim, double alpha, const std::array<int, 2>& k, double h,
                        double r_near) {
  const double k2 = static_cast<double>(k[0]) * k[0] +
                    (dim == 2 ? static_cast<double>(k[1]) * k[1] : 0.0);
  const double distc = h * std::sqrt(k2);
  const double hd = (dim == 1) ? h : h * h;
  if (distc > r_near * (1.0 + 1e-12)) {
    return hd * std::pow(distc, -(dim + alpha));
  }
  const bool touching = (std::abs(k[0]) <= 1) && (dim == 1 || std::abs(k[1]) <= 1);
  const bool edge_touching =
      dim == 2 ? (touching && (k[0] == 0 || k[1] == 0)) : touching;
  if (alpha >= 1.0 && edge_touching) {
    // The exact integral diverges for the piecewise-constant ansatz; the
    // midpoint value keeps the weight finite, positive and symmetric.
    return hd * std::pow(distc, -(dim + alpha));
  }
  return exact_pair_integral(dim, alpha, k, h) / hd;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol_abs) {
  // Adaptive Simpson with recursion on the halves.
  struct Rec {
    const std::function<double(double)>& f;
    double operator()(double a, double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (std::abs(left + right - whole) <= 15.0 * tol || depth >= 40) {
        return left + right + (left + right - whole) / 15.0;
      }
      return (*this)(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
             (*this)(m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
    }
  } rec{f};
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(a, b, fa, fm, fb, whole, tol_abs, 0);
}

}  // namespace levyhom
