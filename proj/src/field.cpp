#include "freeconv/field.hpp"

#include <fftw3.h>

#include <bit>
#include <complex>
#include <cstring>
#include <fstream>
#include <mutex>

#include "freeconv/rng.hpp"

namespace freeconv {

namespace {

// FFTW's planner is not thread-safe; executions on private buffers are.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(std::size_t count) {
    data = fftw_alloc_complex(count);
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

bool five_smooth(int v) {
  for (int p : {2, 3, 5})
    while (v % p == 0) v /= p;
  return v == 1;
}

static_assert(std::endian::native == std::endian::little,
              "binary field dumps assume a little-endian host");

}  // namespace

int choose_embedding_period(int n, int degree) {
  int lo = std::max(n + 2 * degree, 4);
  int m = lo;
  while (!five_smooth(m)) ++m;
  return m;  // 5-smooth gaps are well under 2x, so m <= 2*lo
}

FieldSample sample_field(const SpectralDensity2D& f, int n, std::uint64_t seed,
                         std::uint64_t stream, const SamplerOptions& opts) {
  if (n < 1) throw ValidationError("sample_field: n must be positive");

  const SpectralDensity2D compiled =
      f.bandlimit() ? f : f.bandlimited(opts.approx_degree, opts.taper);
  const int degree = *compiled.bandlimit();
  const int period = choose_embedding_period(n, degree);
  const auto m = static_cast<std::size_t>(period);

  std::vector<double> spectrum;
  compiled.fill_spectrum(period, spectrum);
  for (double& v : spectrum) {
    if (v < 0.0) {
      if (v < -1e-12)
        throw EmbeddingError(
            "sample_field: circulant spectrum is negative beyond roundoff (" +
            std::to_string(v) + "); the density is invalid");
      v = 0.0;
    }
  }

  // One complex standard-normal per torus site, addressed by site index so
  // the fill order never matters.
  GaussianStream rng(seed, stream);
  FftwBuffer buf(m * m);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t idx = s * m + t;
      const double amp = std::sqrt(spectrum[idx]);
      const auto z = rng.normal_pair(idx);
      buf.data[idx][0] = amp * z[0];
      buf.data[idx][1] = amp * z[1];
    }

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_2d(period, period, buf.data, buf.data, FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  // Re (1/M) sum sqrt(lambda) eps e^{+i...} has covariance equal to the
  // periodized (here: exact) covariance of f.
  FieldSample out;
  out.n = n;
  out.period = period;
  out.seed = seed;
  out.stream = stream;
  out.values.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double scale = 1.0 / period;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + j] =
          scale * buf.data[static_cast<std::size_t>(i) * m + j][0];
  return out;
}

void FieldSample::write_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  const auto header = static_cast<std::uint64_t>(n);
  out.write(reinterpret_cast<const char*>(&header), sizeof(header));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

FieldSample FieldSample::read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t header = 0;
  in.read(reinterpret_cast<char*>(&header), sizeof(header));
  FieldSample out;
  out.n = static_cast<int>(header);
  out.values.resize(header * header);
  in.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(out.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field dump: " + path.string());
  return out;
}

}  // namespace freeconv
