#pragma once

#include <string>

#include "mixlab/model.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

// Sampling handle for the centered complex Gaussian with diagonal covariance:
// coordinate k of a draw is sigma_k (xi + i eta), xi/eta standard normals,
// drawn in coordinate order (xi before eta).  Immutable; all randomness is a
// pure function of (seed, stream_id, draw index).  Estimators that need many
// independent streams consume stream_id, stream_id + 1, ... and say so.
struct GaussianSampler {
  CovarianceModel cov;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

class SampleCursor {
 public:
  SampleCursor(const CovarianceModel& cov, std::uint64_t seed, std::uint64_t stream_id)
      : sigma_(cov.sigma), normals_(stream_seed(seed, stream_id)) {}

  void next(cvec& out) {
    out.resize(sigma_.size());
    for (std::size_t k = 0; k < sigma_.size(); ++k) {
      double re = normals_.next();
      double im = normals_.next();
      out[k] = cd{sigma_[k] * re, sigma_[k] * im};
    }
  }

 private:
  std::vector<double> sigma_;
  NormalStream normals_;
};

std::vector<cvec> sample(const GaussianSampler& sampler, std::size_t count);

struct MomentEstimate {
  double value = 0.0;          // mean over all samples
  double stderr_ = 0.0;        // batch-means standard error
  double median_batches = 0.0; // median of batch means (heavy-tail refinement)
  int batches = 0;
};

// Estimate of E ||x||^{2k} from `count` draws split over `n_batches`
// substreams (stream_id .. stream_id + n_batches - 1).
MomentEstimate empirical_moment(const GaussianSampler& sampler, std::size_t count, int k,
                                int n_batches = 64);

// E ||x||^{2k} exactly: ||x||^2 is a sum of independent 2 sigma_j^2 Exp(1)
// variables, so cumulants are kappa_m = (m-1)! sum_j (2 sigma_j^2)^m and
// moments follow by the standard recursion.
double exact_moment(const CovarianceModel& cov, int k);

// k! (2 sum_j sigma_j^2)^k = k! ||E||_2^{2k}.
double moment_bound(const CovarianceModel& cov, int k);

struct CovarianceEstimate {
  std::size_t dim = 0;
  std::vector<cd> matrix;             // row-major, entry (j,k) estimates E[x_j conj(x_k)]
  std::vector<double> entry_stderr;   // batch-means stderr per entry (max of re/im parts)
};

CovarianceEstimate empirical_covariance(const GaussianSampler& sampler, std::size_t count,
                                        int n_batches = 64);

// Binary sample dump: "MIXSMP01", then u64 dim, count, seed, stream_id,
// then count*dim little-endian double pairs (re, im).
void dump_samples(const std::string& path, const GaussianSampler& sampler, std::size_t count);

struct SampleDump {
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<cvec> samples;
};

SampleDump load_samples(const std::string& path);

}  // namespace mixlab
