#include "ffire/kernels.hpp"

#include <fftw3.h>
#include <omp.h>

#include <cstring>
#include <mutex>

namespace ffire {

void convolve_half_serial(const std::vector<double>& v, std::vector<double>& out) {
    const int K = static_cast<int>(v.size()) - 1;
    out.assign(v.size(), 0.0);
    for (int k = 2; k <= K; ++k) {
        double s = 0.0;
        for (int l = 1; l < k; ++l) s += v[l] * v[k - l];
        out[k] = s;
    }
}

void convolve_half_parallel(const std::vector<double>& v, std::vector<double>& out) {
    const int K = static_cast<int>(v.size()) - 1;
    out.assign(v.size(), 0.0);
    const double* a = v.data();
    double* c = out.data();
#pragma omp parallel for schedule(static, 64)
    for (int k = 2; k <= K; ++k) {
        // c_k = 2 sum_{l < k/2} v_l v_{k-l} (+ v_{k/2}^2 for even k).
        // Four accumulators so the compiler can vectorize without
        // reassociating; the summation order is fixed, hence the result does
        // not depend on the thread count.
        const int h = (k - 1) / 2;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        int l = 1;
        for (; l + 3 <= h; l += 4) {
            s0 += a[l] * a[k - l];
            s1 += a[l + 1] * a[k - l - 1];
            s2 += a[l + 2] * a[k - l - 2];
            s3 += a[l + 3] * a[k - l - 3];
        }
        for (; l <= h; ++l) s0 += a[l] * a[k - l];
        double s = 2.0 * ((s0 + s1) + (s2 + s3));
        if ((k & 1) == 0) s += a[k / 2] * a[k / 2];
        c[k] = s;
    }
}

namespace {
std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe
}

struct FftConvolver::Impl {
    int K = 0;
    int n = 0;  // padded transform length
    double* in = nullptr;
    fftw_complex* freq = nullptr;
    fftw_plan fwd{};
    fftw_plan bwd{};
};

FftConvolver::FftConvolver(int K) : impl_(new Impl) {
    impl_->K = K;
    int n = 1;
    while (n < 2 * K + 1) n <<= 1;
    impl_->n = n;
    impl_->in = fftw_alloc_real(n);
    impl_->freq = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    impl_->fwd = fftw_plan_dft_r2c_1d(n, impl_->in, impl_->freq, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_1d(n, impl_->freq, impl_->in, FFTW_ESTIMATE);
}

FftConvolver::~FftConvolver() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(impl_->fwd);
    fftw_destroy_plan(impl_->bwd);
    fftw_free(impl_->in);
    fftw_free(impl_->freq);
}

void FftConvolver::operator()(const std::vector<double>& v, std::vector<double>& out) {
    const int K = impl_->K;
    const int n = impl_->n;
    std::memset(impl_->in, 0, sizeof(double) * n);
    // shift: in[i] = v_{i+1}
    std::memcpy(impl_->in, v.data() + 1, sizeof(double) * K);
    fftw_execute(impl_->fwd);
    for (int i = 0; i <= n / 2; ++i) {
        const double re = impl_->freq[i][0], im = impl_->freq[i][1];
        impl_->freq[i][0] = re * re - im * im;
        impl_->freq[i][1] = 2.0 * re * im;
    }
    fftw_execute(impl_->bwd);
    out.assign(v.size(), 0.0);
    const double scale = 1.0 / n;
    // (v*v)[j] = sum_{i+l=j} v_{i+1} v_{l+1} corresponds to c_{j+2}
    for (int k = 2; k <= K; ++k) {
        double c = impl_->in[k - 2] * scale;
        out[k] = (c < 0.0) ? 0.0 : c;  // FFT noise floor on exact zeros
    }
}

Convolver::Convolver(int K, ConvMethod method) {
    const bool fft = method == ConvMethod::Fft ||
                     (method == ConvMethod::Auto && K >= kFftThreshold);
    if (fft) fft_ = std::make_unique<FftConvolver>(K);
}

void Convolver::operator()(const std::vector<double>& v, std::vector<double>& out) {
    if (fft_)
        (*fft_)(v, out);
    else
        convolve_half_parallel(v, out);
}

double flux_closure(const std::vector<double>& v) {
    const int K = static_cast<int>(v.size()) - 1;
    // suffix sums s0[j] = sum_{b>=j} v_b, s1[j] = sum_{b>=j} b v_b
    std::vector<double> s0(K + 2, 0.0), s1(K + 2, 0.0);
    for (int b = K; b >= 1; --b) {
        s0[b] = s0[b + 1] + v[b];
        s1[b] = s1[b + 1] + static_cast<double>(b) * v[b];
    }
    double total = 0.0;
    for (int a = 1; a <= K; ++a) {
        const int j = K - a + 1;  // partners b >= j cross the boundary
        total += v[a] * (static_cast<double>(a) * s0[j] + s1[j]);
    }
    return 0.5 * total;
}

}  // namespace ffire
