#pragma once

// Reference implementations written straight from the formulas with plain
// loops. They share no code with the library.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Metrics {
  double mae, rae, maer, mraer, rmaer, rmraer;
};

inline double floorTo(double v, double eps) { return v < eps ? eps : v; }

inline double ratio(double num, double den) { return num == 0.0 ? 0.0 : num / den; }

/// Metric family; epsilon = MAE / 2 unless a non-negative value is given.
inline Metrics metrics(const std::vector<double>& yhat, const std::vector<double>& y, double fixedEps = -1) {
  const std::size_t n = y.size();
  double my = 0, mp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    my += y[i];
    mp += yhat[i];
  }
  my /= n;
  mp /= n;
  double mae = 0, dev = 0, vy = 0, vp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mae += std::fabs(yhat[i] - y[i]);
    dev += std::fabs(y[i] - my);
    vy += (y[i] - my) * (y[i] - my);
    vp += (yhat[i] - mp) * (yhat[i] - mp);
  }
  mae /= n;
  dev /= n;
  const double sy = std::sqrt(vy / n), sp = std::sqrt(vp / n);
  const double eps = fixedEps >= 0 ? fixedEps : mae / 2;
  auto f = [eps](double x) { return x >= 0 ? floorTo(x, eps) : floorTo(-2 * x, eps); };
  Metrics m{mae, mae / dev, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::fabs(yhat[i] - y[i]);
    const double da = floorTo(std::fabs(y[i]), eps);
    const double dr = floorTo(std::fabs(my - y[i]), eps);
    const double c = (yhat[i] - mp) * (y[i] - my);
    m.maer += ratio(e, da);
    m.mraer += ratio(e, dr);
    m.rmaer += ratio(e, da) * f(c / (sp * sy * da * da));
    m.rmraer += ratio(e, dr) * f(c / (sp * sy * dr * dr));
  }
  m.maer /= n;
  m.mraer /= n;
  m.rmaer /= n;
  m.rmraer /= n;
  return m;
}

/// Ridge on standardized columns with intercept mean(y), by gradient descent.
inline Eigen::VectorXd ridgeGradientDescent(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double lambda) {
  const double my = y.mean();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(Z.cols());
  const Eigen::MatrixXd A = Z.transpose() * Z;
  const double L = 2 * (A.operatorNorm() + lambda);
  const double step = 1.0 / L;
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd g = 2 * (Z.transpose() * (Z * w - (y.array() - my).matrix())) + 2 * lambda * w;
    w -= step * g;
    if (g.norm() < 1e-12) break;
  }
  return w;
}

/// Ordinary least squares with intercept via normal equations.
inline Eigen::VectorXd olsPredict(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::MatrixXd& Q) {
  Eigen::MatrixXd A(X.rows(), X.cols() + 1);
  A << Eigen::VectorXd::Ones(X.rows()), X;
  const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  Eigen::MatrixXd B(Q.rows(), Q.cols() + 1);
  B << Eigen::VectorXd::Ones(Q.rows()), Q;
  return B * beta;
}

/// Plain distinct-n-gram recall and precision of tgt against src.
inline std::pair<double, double> setOverlap(const std::vector<std::string>& src, const std::vector<std::string>& tgt,
                                            const std::vector<int>& orders) {
  auto grams = [&](const std::vector<std::string>& t) {
    std::set<std::string> g;
    for (int n : orders)
      for (std::size_t i = 0; i + n <= t.size(); ++i) {
        std::string s;
        for (int k = 0; k < n; ++k) s += (k ? " " : "") + t[i + k];
        g.insert(s);
      }
    return g;
  };
  const auto gs = grams(src), gt = grams(tgt);
  if (gs.empty() || gt.empty()) return {0.0, 0.0};
  double common = 0;
  for (const auto& g : gt) common += gs.count(g);
  return {common / gt.size(), common / gs.size()};
}

}  // namespace oracle
