#include "nlos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nlos {

std::string EvalReport::to_line() const {
  std::ostringstream out;
  out.precision(12);
  out << "{\"mse_2d\":" << mse_2d << ",\"chamfer_3d\":" << chamfer_3d
      << ",\"voxel_iou\":" << voxel_iou << ",\"sbr_db\":" << sbr_db
      << ",\"snr_db\":" << snr_db << ",\"scene_hash\":" << scene_hash
      << ",\"seed\":" << seed << "}";
  return out.str();
}

double mse(const PenumbraImage& a, const PenumbraImage& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw std::invalid_argument("mse: image shape mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double mse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mse: size mismatch");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double chamfer(const PointCloud& p, const PointCloud& q) {
  if (p.points.empty() || q.points.empty())
    throw std::invalid_argument("chamfer: empty cloud");
  auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double acc = 0.0;
    for (const Vec3& a : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& b : to) best = std::min(best, (a - b).squaredNorm());
      acc += best;
    }
    return acc / static_cast<double>(from.size());
  };
  return directed(p.points, q.points) + directed(q.points, p.points);
}

double voxel_iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("voxel_iou: length mismatch");
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool av = a[i] != 0, bv = b[i] != 0;
    inter += av && bv;
    uni += av || bv;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double sbr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& background) {
  if (signal.size() != background.size())
    throw std::invalid_argument("sbr_db: size mismatch");
  const double bp = background.squaredNorm() / background.size();
  if (bp == 0.0) throw std::invalid_argument("sbr_db: zero background");
  const double sp = signal.squaredNorm() / signal.size();
  return 10.0 * std::log10(sp / bp);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const size_t n = v.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * (i + j) + 1.0;  // average rank, 1-based
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double beta_cf(double a, double b, double x) {
  // Lentz's continued fraction for the incomplete beta function.
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-14) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   beta_cf(b, a, 1.0 - x) / b;
}

SpearmanResult spearman(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("spearman: need matched samples, n >= 3");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  SpearmanResult out;
  out.n = static_cast<int>(n);
  if (sxx == 0.0 || syy == 0.0) {
    out.rho = 0.0;
    out.p_one_sided_negative = 1.0;
    return out;
  }
  out.rho = sxy / std::sqrt(sxx * syy);
  const double dof = static_cast<double>(n) - 2.0;
  const double r2 = std::min(out.rho * out.rho, 1.0 - 1e-15);
  const double t = out.rho * std::sqrt(dof / (1.0 - r2));
  // one-sided P(T <= t) for negative association
  const double xbeta = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, xbeta);
  out.p_one_sided_negative = t < 0.0 ? tail : 1.0 - tail;
  return out;
}

}  // namespace nlos
