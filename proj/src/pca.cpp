#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mapperscope/geometry.hpp"
#include "mapperscope/parallel.hpp"

namespace mapperscope {
namespace {

// Column-major n x p block of vectors.
struct Block {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> data;

  Block(std::size_t rows, std::size_t cols) : n(rows), p(cols), data(rows * cols, 0.0) {}
  double* col(std::size_t j) { return data.data() + j * n; }
  const double* col(std::size_t j) const { return data.data() + j * n; }
};

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Two passes of modified Gram-Schmidt. Columns that vanish (rank-deficient
// input) are refilled from `rng` so the block stays a full orthonormal basis.
void orthonormalize(Block& q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (std::size_t j = 0; j < q.p; ++j) {
    double* v = q.col(j);
    const double before = std::sqrt(dot(v, v, q.n));
    for (int attempt = 0;; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double* u = q.col(i);
          const double r = dot(u, v, q.n);
          for (std::size_t t = 0; t < q.n; ++t) v[t] -= r * u[t];
        }
      }
      const double norm = std::sqrt(dot(v, v, q.n));
      if (norm > 1e-10 * std::max(before, 1e-300) && norm > 1e-300) {
        for (std::size_t t = 0; t < q.n; ++t) v[t] /= norm;
        break;
      }
      if (attempt > 8) throw Error(ErrorCode::DegenerateData, "could not complete orthonormal basis");
      for (std::size_t t = 0; t < q.n; ++t) v[t] = unif(rng);
    }
  }
}

// Cyclic Jacobi on a dense symmetric p x p matrix (row-major). Returns
// eigenvalues in descending order and eigenvectors as columns of `vectors`.
void symmetric_eigen(std::vector<double> a, std::size_t p, std::vector<double>& values, std::vector<double>& vectors) {
  std::vector<double> v(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) v[i * p + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        total += a[i * p + j] * a[i * p + j];
        if (i != j) off += a[i * p + j] * a[i * p + j];
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;

    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = r + 1; c < p; ++c) {
        const double arc = a[r * p + c];
        if (std::abs(arc) < 1e-300) continue;
        const double theta = (a[c * p + c] - a[r * p + r]) / (2.0 * arc);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t k = 0; k < p; ++k) {
          const double akr = a[k * p + r], akc = a[k * p + c];
          a[k * p + r] = cs * akr - sn * akc;
          a[k * p + c] = sn * akr + cs * akc;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double ark = a[r * p + k], ack = a[c * p + k];
          a[r * p + k] = cs * ark - sn * ack;
          a[c * p + k] = sn * ark + cs * ack;
        }
        for (std::size_t k = 0; k < p; ++k) {
          const double vkr = v[k * p + r], vkc = v[k * p + c];
          v[k * p + r] = cs * vkr - sn * vkc;
          v[k * p + c] = sn * vkr + cs * vkc;
        }
      }
    }
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x * p + x] > a[y * p + y]; });
  values.resize(p);
  vectors.assign(p * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    values[j] = a[order[j] * p + order[j]];
    for (std::size_t k = 0; k < p; ++k) vectors[k * p + j] = v[k * p + order[j]];
  }
}

// Centered Gram matrix G[i][j] = <x_i - mu, x_j - mu>, row-major n x n.
std::vector<double> centered_gram(const FeatureMatrix& m, std::span<const double> means) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  std::vector<double> gram(n * n, 0.0);
  parallel_for(0, n, [&](std::size_t i) {
    std::vector<double> ci(d);
    const auto xi = m.row(i);
    for (std::size_t l = 0; l < d; ++l) ci[l] = xi[l] - means[l];
    for (std::size_t j = i; j < n; ++j) {
      const auto xj = m.row(j);
      double acc = 0.0;
      for (std::size_t l = 0; l < d; ++l) acc += ci[l] * (xj[l] - means[l]);
      gram[i * n + j] = acc;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[i * n + j] = gram[j * n + i];
  }
  return gram;
}

void multiply(const std::vector<double>& gram, const Block& q, Block& out) {
  const std::size_t n = q.n;
  parallel_for(0, q.p, [&](std::size_t j) {
    const double* v = q.col(j);
    double* o = out.col(j);
    for (std::size_t i = 0; i < n; ++i) o[i] = dot(gram.data() + i * n, v, n);
  });
}

// out = in * w, where w is p x p row-major.
Block rotate(const Block& in, const std::vector<double>& w) {
  Block out(in.n, in.p);
  for (std::size_t j = 0; j < in.p; ++j) {
    double* o = out.col(j);
    for (std::size_t s = 0; s < in.p; ++s) {
      const double coef = w[s * in.p + j];
      if (coef == 0.0) continue;
      const double* c = in.col(s);
      for (std::size_t i = 0; i < in.n; ++i) o[i] += coef * c[i];
    }
  }
  return out;
}

}  // namespace

std::vector<double> LensValues::column(std::size_t axis) const {
  std::vector<double> out(rows);
  for (std::size_t i = 0; i < rows; ++i) out[i] = at(i, axis);
  return out;
}

std::vector<double> LensValues::project(std::span<const float> x) const {
  if (x.size() != means.size()) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match lens");
  const std::size_t d = means.size();
  std::vector<double> out(k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    const double* dir = components.data() + a * d;
    double acc = 0.0;
    for (std::size_t l = 0; l < d; ++l) acc += (x[l] - means[l]) * dir[l];
    out[a] = acc;
  }
  return out;
}

LensValues lens_from_values(std::size_t rows, std::size_t k, std::vector<double> values) {
  if (k == 0 || values.size() != rows * k) throw Error(ErrorCode::BadK, "lens values do not match rows*k");
  LensValues lens;
  lens.rows = rows;
  lens.k = k;
  lens.values = std::move(values);
  return lens;
}

LensValues pca_lens(const FeatureMatrix& m, std::size_t k, const PcaOptions& options) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  if (k == 0 || n < 2 || k > std::min(n - 1, d)) {
    throw Error(ErrorCode::BadK, "k=" + std::to_string(k) + " outside [1, min(n-1, d)]");
  }

  const ColumnStats stats = column_stats(m);
  const std::vector<double>& means = stats.means;
  const std::vector<double> gram = centered_gram(m, means);

  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gram[i * n + i];
  if (!(trace > 0.0)) throw Error(ErrorCode::DegenerateData, "all rows are identical");

  // Block subspace iteration with Rayleigh-Ritz extraction.
  const std::size_t p = std::min(n, k + options.oversample);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Block q(n, p);
  for (double& x : q.data) x = unif(rng);
  orthonormalize(q, rng);

  Block gq(n, p);
  std::vector<double> ritz(p), w, prev(k, std::numeric_limits<double>::quiet_NaN());
  Block vecs(n, p);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iterations, 1); ++iter) {
    multiply(gram, q, gq);
    std::vector<double> t(p * p);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) t[a * p + b] = t[b * p + a] = 0.5 * (dot(q.col(a), gq.col(b), n) + dot(q.col(b), gq.col(a), n));
    }
    symmetric_eigen(std::move(t), p, ritz, w);
    vecs = rotate(q, w);
    Block gv = rotate(gq, w);

    const double scale = std::max(ritz[0], 1e-300);
    bool converged = true;
    for (std::size_t j = 0; j < k; ++j) {
      const double change = std::abs(ritz[j] - prev[j]);
      // The second clause is the rounding floor for (near-)null eigenvalues.
      if (!(change <= options.tolerance * std::abs(ritz[j]) || change <= 1e-13 * scale)) converged = false;
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = gv.col(j)[i] - ritz[j] * vecs.col(j)[i];
        res += r * r;
      }
      if (std::sqrt(res) > options.tolerance * scale) converged = false;
      prev[j] = ritz[j];
    }
    if (converged) break;
    q = std::move(gv);
    orthonormalize(q, rng);
  }

  LensValues lens;
  lens.rows = n;
  lens.k = k;
  lens.means = means;
  lens.values.assign(n * k, 0.0);
  lens.explained_variance.assign(k, 0.0);
  lens.components.assign(k * d, 0.0);

  const double top = std::max(ritz[0], 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double eig = ritz[j];
    if (!(eig > 1e-12 * top)) continue;  // null direction: zero component and scores
    lens.explained_variance[j] = eig / static_cast<double>(n);

    // Direction = Xc^T u / sigma.
    double* dir = lens.components.data() + j * d;
    const double* u = vecs.col(j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = m.row(i);
      for (std::size_t l = 0; l < d; ++l) dir[l] += (xi[l] - means[l]) * u[i];
    }
    double norm = 0.0;
    for (std::size_t l = 0; l < d; ++l) norm += dir[l] * dir[l];
    norm = std::sqrt(norm);
    std::size_t lead = 0;
    for (std::size_t l = 0; l < d; ++l) {
      dir[l] /= norm;
      if (std::abs(dir[l]) > std::abs(dir[lead])) lead = l;
    }
    if (dir[lead] < 0.0) {
      for (std::size_t l = 0; l < d; ++l) dir[l] = -dir[l];
    }
  }

  parallel_for(0, n, [&](std::size_t i) {
    const auto xi = m.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double* dir = lens.components.data() + j * d;
      double acc = 0.0;
      for (std::size_t l = 0; l < d; ++l) acc += (xi[l] - means[l]) * dir[l];
      lens.values[i * k + j] = acc;
    }
  });
  return lens;
}

}  // namespace mapperscope
