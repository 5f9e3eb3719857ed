#pragma once

#include <cstddef>
#include <span>

// Inner loops shared by the semi-wave iteration and the free-boundary
// stepper. Every kernel has a plain serial version and an OpenMP version.
// The OpenMP scans use a fixed block decomposition, so their output does not
// depend on the number of threads.

namespace lvfb::kernels {

/// Exact integral of exp(rate*(s_near - xi)) against linear data on one cell
/// of width h. With x = rate*h (x <= 0 for a decaying kernel):
///   decay  = e^x
///   w_far  = h * E2(x)            (weight of the node away from s_near)
///   w_near = h * (E1(x) - E2(x))
/// where E1 = (e^x - 1)/x and E2 = (e^x (x - 1) + 1)/x^2.
struct SegmentWeights {
    double decay;
    double w_far;
    double w_near;
};

SegmentWeights exp_segment_weights(double rate, double h);

inline constexpr std::size_t kScanBlock = 1024;

enum class Backend { Serial, Parallel };

namespace serial {

/// c[i] = w_far*H[i] + w_near*H[i+1]; y[0] = y0; y[i+1] = decay*y[i] + c[i].
void forward_exp_scan(std::span<const double> H, SegmentWeights w, double y0, std::span<double> y);

/// Mirror image: y[n-1] = y_end; y[i] = decay*y[i+1] + w_far*H[i+1] + w_near*H[i].
void backward_exp_scan(std::span<const double> H, SegmentWeights w, double y_end,
                       std::span<double> y);

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double max_value(std::span<const double> a);

/// Linear interpolation of samples on the uniform grid x0 + j*dx at the
/// points q[i]. Points beyond the last sample take `right`; points before
/// the first take the first sample.
void lerp_uniform(double x0, double dx, std::span<const double> f, std::span<const double> q,
                  double right, std::span<double> out);

}  // namespace serial

namespace omp {

void forward_exp_scan(std::span<const double> H, SegmentWeights w, double y0, std::span<double> y);
void backward_exp_scan(std::span<const double> H, SegmentWeights w, double y_end,
                       std::span<double> y);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double max_value(std::span<const double> a);
void lerp_uniform(double x0, double dx, std::span<const double> f, std::span<const double> q,
                  double right, std::span<double> out);

}  // namespace omp

/// Dispatch used by the solvers: the OpenMP version when the library was
/// built with OpenMP, the serial one otherwise.
#ifdef LVFB_HAVE_OPENMP
namespace active = omp;
#else
namespace active = serial;
#endif

}  // namespace lvfb::kernels
