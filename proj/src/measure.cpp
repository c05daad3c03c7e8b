#include "mixlab/measure.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "mixlab/parallel.hpp"

namespace mixlab {

namespace {

void check_moment_args(std::size_t count, int k, int n_batches) {
  if (k < 1 || k > 6) throw std::invalid_argument("empirical_moment: k must be in 1..6");
  if (count < 10000) throw std::invalid_argument("empirical_moment: need at least 10^4 samples");
  if (n_batches < 2) throw std::invalid_argument("empirical_moment: need at least 2 batches");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double batch_stderr(const std::vector<double>& means, double grand) {
  double acc = 0.0;
  for (double m : means) acc += (m - grand) * (m - grand);
  std::size_t b = means.size();
  return std::sqrt(acc / static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace

std::vector<cvec> sample(const GaussianSampler& sampler, std::size_t count) {
  std::vector<cvec> out(count);
  SampleCursor cur(sampler.cov, sampler.seed, sampler.stream_id);
  for (std::size_t i = 0; i < count; ++i) cur.next(out[i]);
  return out;
}

MomentEstimate empirical_moment(const GaussianSampler& sampler, std::size_t count, int k,
                                int n_batches) {
  check_moment_args(count, k, n_batches);
  std::size_t per_batch = count / static_cast<std::size_t>(n_batches);
  if (per_batch == 0) throw std::invalid_argument("empirical_moment: too many batches");
  std::vector<double> means(static_cast<std::size_t>(n_batches), 0.0);
  parallel_for(static_cast<std::size_t>(n_batches), [&](std::size_t b) {
    SampleCursor cur(sampler.cov, sampler.seed, sampler.stream_id + b);
    cvec x;
    KahanSum<double> acc;
    for (std::size_t i = 0; i < per_batch; ++i) {
      cur.next(x);
      double v = norm_sq(x);
      double p = v;
      for (int j = 1; j < k; ++j) p *= v;
      acc.add(p);
    }
    means[b] = acc.value() / static_cast<double>(per_batch);
  });
  MomentEstimate est;
  est.batches = n_batches;
  est.value = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(n_batches);
  est.stderr_ = batch_stderr(means, est.value);
  est.median_batches = median(means);
  return est;
}

double exact_moment(const CovarianceModel& cov, int k) {
  if (k < 0 || k > 12) throw std::invalid_argument("exact_moment: k must be in 0..12");
  // kappa_m = (m-1)! sum_j (2 sigma_j^2)^m; m_p = sum C(p-1,i) kappa_{i+1} m_{p-1-i}.
  std::vector<double> kappa(static_cast<std::size_t>(k) + 1, 0.0);
  for (int m = 1; m <= k; ++m) {
    double fact = 1.0;
    for (int i = 2; i < m; ++i) fact *= i;
    double s = 0.0;
    for (double sig : cov.sigma) s += std::pow(2.0 * sig * sig, m);
    kappa[static_cast<std::size_t>(m)] = fact * s;
  }
  std::vector<double> mom(static_cast<std::size_t>(k) + 1, 0.0);
  mom[0] = 1.0;
  for (int p = 1; p <= k; ++p) {
    double acc = 0.0;
    double binom = 1.0;  // C(p-1, i)
    for (int i = 0; i <= p - 1; ++i) {
      acc += binom * kappa[static_cast<std::size_t>(i + 1)] * mom[static_cast<std::size_t>(p - 1 - i)];
      binom = binom * static_cast<double>(p - 1 - i) / static_cast<double>(i + 1);
    }
    mom[static_cast<std::size_t>(p)] = acc;
  }
  return mom[static_cast<std::size_t>(k)];
}

double moment_bound(const CovarianceModel& cov, int k) {
  if (k < 1) throw std::invalid_argument("moment_bound: k must be >= 1");
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return fact * std::pow(2.0 * sum_sigma_sq(cov), k);
}

CovarianceEstimate empirical_covariance(const GaussianSampler& sampler, std::size_t count,
                                        int n_batches) {
  if (count < 10000) throw std::invalid_argument("empirical_covariance: need >= 10^4 samples");
  if (n_batches < 2) throw std::invalid_argument("empirical_covariance: need >= 2 batches");
  std::size_t dim = sampler.cov.sigma.size();
  std::size_t per_batch = count / static_cast<std::size_t>(n_batches);
  std::size_t nb = static_cast<std::size_t>(n_batches);
  std::vector<std::vector<cd>> batch_means(nb);
  parallel_for(nb, [&](std::size_t b) {
    SampleCursor cur(sampler.cov, sampler.seed, sampler.stream_id + b);
    std::vector<cd> acc(dim * dim, cd{0.0, 0.0});
    cvec x;
    for (std::size_t i = 0; i < per_batch; ++i) {
      cur.next(x);
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) acc[r * dim + c] += x[r] * std::conj(x[c]);
    }
    for (cd& v : acc) v /= static_cast<double>(per_batch);
    batch_means[b] = std::move(acc);
  });
  CovarianceEstimate est;
  est.dim = dim;
  est.matrix.assign(dim * dim, cd{0.0, 0.0});
  est.entry_stderr.assign(dim * dim, 0.0);
  for (std::size_t e = 0; e < dim * dim; ++e) {
    cd grand{0.0, 0.0};
    for (std::size_t b = 0; b < nb; ++b) grand += batch_means[b][e];
    grand /= static_cast<double>(nb);
    est.matrix[e] = grand;
    double vr = 0.0, vi = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      double dr = batch_means[b][e].real() - grand.real();
      double di = batch_means[b][e].imag() - grand.imag();
      vr += dr * dr;
      vi += di * di;
    }
    double denom = static_cast<double>(nb - 1) * static_cast<double>(nb);
    est.entry_stderr[e] = std::sqrt(std::max(vr, vi) / denom);
  }
  return est;
}

void dump_samples(const std::string& path, const GaussianSampler& sampler, std::size_t count) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("dump_samples: cannot open " + path);
  const char magic[8] = {'M', 'I', 'X', 'S', 'M', 'P', '0', '1'};
  std::uint64_t header[4] = {static_cast<std::uint64_t>(sampler.cov.sigma.size()),
                             static_cast<std::uint64_t>(count), sampler.seed, sampler.stream_id};
  std::fwrite(magic, 1, 8, f);
  std::fwrite(header, sizeof(std::uint64_t), 4, f);
  SampleCursor cur(sampler.cov, sampler.seed, sampler.stream_id);
  cvec x;
  for (std::size_t i = 0; i < count; ++i) {
    cur.next(x);
    for (const cd& v : x) {
      double re = v.real(), im = v.imag();
      std::fwrite(&re, sizeof(double), 1, f);
      std::fwrite(&im, sizeof(double), 1, f);
    }
  }
  std::fclose(f);
}

SampleDump load_samples(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("load_samples: cannot open " + path);
  char magic[8];
  std::uint64_t header[4];
  if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, "MIXSMP01", 8) != 0 ||
      std::fread(header, sizeof(std::uint64_t), 4, f) != 4) {
    std::fclose(f);
    throw std::runtime_error("load_samples: bad header in " + path);
  }
  SampleDump dump;
  dump.dim = static_cast<std::size_t>(header[0]);
  dump.seed = header[2];
  dump.stream_id = header[3];
  std::size_t count = static_cast<std::size_t>(header[1]);
  dump.samples.assign(count, cvec(dump.dim));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < dump.dim; ++k) {
      double re, im;
      if (std::fread(&re, sizeof(double), 1, f) != 1 || std::fread(&im, sizeof(double), 1, f) != 1) {
        std::fclose(f);
        throw std::runtime_error("load_samples: truncated data in " + path);
      }
      dump.samples[i][k] = cd{re, im};
    }
  }
  std::fclose(f);
  return dump;
}

}  // namespace mixlab
