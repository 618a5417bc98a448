#include "qnsp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace qnsp::fft {

namespace {

// One cached plan pair per grid shape. Execution goes through the entry's own
// buffers under the entry mutex: FFTW plan creation is not thread safe and the
// memcpy round trip keeps alignment concerns out of the field storage.
struct PlanEntry {
  std::mutex mtx;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  std::size_t nreal = 0, ncplx = 0;

  ~PlanEntry() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (real) fftw_free(real);
    if (cplx) fftw_free(cplx);
  }
};

std::mutex cache_mtx;
std::map<std::array<int, 4>, std::unique_ptr<PlanEntry>> cache;

PlanEntry& entry_for(const Grid& g) {
  std::array<int, 4> key = {g.dim(), g.n(0), g.dim() > 1 ? g.n(1) : 1,
                            g.dim() > 2 ? g.n(2) : 1};
  std::lock_guard<std::mutex> lk(cache_mtx);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto e = std::make_unique<PlanEntry>();
  std::vector<int> dims(g.dim());
  for (int a = 0; a < g.dim(); ++a) dims[a] = g.n(a);
  e->nreal = g.points();
  e->ncplx = coef_size(g);
  e->real = fftw_alloc_real(e->nreal);
  e->cplx = fftw_alloc_complex(e->ncplx);
  e->fwd = fftw_plan_dft_r2c(g.dim(), dims.data(), e->real, e->cplx, FFTW_ESTIMATE);
  e->bwd = fftw_plan_dft_c2r(g.dim(), dims.data(), e->cplx, e->real, FFTW_ESTIMATE);
  auto& ref = *e;
  cache.emplace(key, std::move(e));
  return ref;
}

}  // namespace

std::size_t coef_size(const Grid& g) {
  std::size_t s = 1;
  for (int a = 0; a < g.dim() - 1; ++a) s *= static_cast<std::size_t>(g.n(a));
  s *= static_cast<std::size_t>(g.n(g.dim() - 1) / 2 + 1);
  return s;
}

void forward(const Grid& g, const double* values, std::complex<double>* coef) {
  PlanEntry& e = entry_for(g);
  std::lock_guard<std::mutex> lk(e.mtx);
  std::memcpy(e.real, values, e.nreal * sizeof(double));
  fftw_execute(e.fwd);
  const double norm = 1.0 / static_cast<double>(g.points());
  for (std::size_t i = 0; i < e.ncplx; ++i)
    coef[i] = std::complex<double>(e.cplx[i][0] * norm, e.cplx[i][1] * norm);
}

void inverse(const Grid& g, const std::complex<double>* coef, double* values) {
  PlanEntry& e = entry_for(g);
  std::lock_guard<std::mutex> lk(e.mtx);
  for (std::size_t i = 0; i < e.ncplx; ++i) {
    e.cplx[i][0] = coef[i].real();
    e.cplx[i][1] = coef[i].imag();
  }
  fftw_execute(e.bwd);
  std::memcpy(values, e.real, e.nreal * sizeof(double));
}

}  // namespace qnsp::fft
