#include "driftids/numgrad/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace driftids::numgrad {

namespace {

void check_nn(const Matrix& a, const Matrix& w, Matrix& out, Accumulate acc) {
    require(a.cols() == w.rows(), ErrorKind::dimension,
            "gemm_nn inner dims " + shape_string(a) + " * " + shape_string(w));
    if (acc == Accumulate::no) {
        out = Matrix(a.rows(), w.cols());
    } else {
        require_shape(out, a.rows(), w.cols(), "gemm_nn accumulator");
    }
}

void check_tn(const Matrix& a, const Matrix& g, Matrix& out, Accumulate acc) {
    require(a.rows() == g.rows(), ErrorKind::dimension,
            "gemm_tn batch dims " + shape_string(a) + " vs " + shape_string(g));
    if (acc == Accumulate::no) {
        out = Matrix(a.cols(), g.cols());
    } else {
        require_shape(out, a.cols(), g.cols(), "gemm_tn accumulator");
    }
}

void check_nt(const Matrix& g, const Matrix& w, Matrix& out, Accumulate acc) {
    require(g.cols() == w.cols(), ErrorKind::dimension,
            "gemm_nt inner dims " + shape_string(g) + " vs " + shape_string(w));
    if (acc == Accumulate::no) {
        out = Matrix(g.rows(), w.rows());
    } else {
        require_shape(out, g.rows(), w.rows(), "gemm_nt accumulator");
    }
}

void check_colsum(const Matrix& g, Matrix& out, Accumulate acc) {
    if (acc == Accumulate::no) {
        out = Matrix(1, g.cols());
    } else {
        require_shape(out, 1, g.cols(), "col_sum accumulator");
    }
}

}  // namespace

namespace kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n < 1 ? 1 : n);
#else
    (void)n;
#endif
}

void gemm_nn(const Matrix& a, const Matrix& w, Matrix& out, Accumulate acc) {
    check_nn(a, w, out, acc);
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(a.rows());
    const std::size_t inner = a.cols();
    const std::size_t cols = w.cols();
    const double* pa = a.data();
    const double* pw = w.data();
    double* po = out.data();
    const bool parallel = a.rows() * inner * cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        double* orow = po + i * cols;
        const double* arow = pa + i * inner;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = arow[k];
            const double* wrow = pw + k * cols;
            for (std::size_t j = 0; j < cols; ++j) {
                orow[j] += aik * wrow[j];
            }
        }
    }
}

void gemm_tn(const Matrix& a, const Matrix& g, Matrix& out, Accumulate acc) {
    check_tn(a, g, out, acc);
    const std::size_t batch = a.rows();
    const std::ptrdiff_t inner = static_cast<std::ptrdiff_t>(a.cols());
    const std::size_t cols = g.cols();
    const double* pa = a.data();
    const double* pg = g.data();
    double* po = out.data();
    const bool parallel = batch * a.cols() * cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t k = 0; k < inner; ++k) {
        double* orow = po + k * cols;
        for (std::size_t b = 0; b < batch; ++b) {
            const double abk = pa[b * a.cols() + k];
            const double* grow = pg + b * cols;
            for (std::size_t j = 0; j < cols; ++j) {
                orow[j] += abk * grow[j];
            }
        }
    }
}

void gemm_nt(const Matrix& g, const Matrix& w, Matrix& out, Accumulate acc) {
    check_nt(g, w, out, acc);
    const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(g.rows());
    const std::size_t inner = g.cols();
    const std::size_t cols = w.rows();
    const double* pg = g.data();
    const double* pw = w.data();
    double* po = out.data();
    const bool parallel = g.rows() * inner * cols >= kParallelWork;
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t b = 0; b < rows; ++b) {
        const double* grow = pg + b * inner;
        double* orow = po + b * cols;
        for (std::size_t k = 0; k < cols; ++k) {
            const double* wrow = pw + k * inner;
            double s = 0.0;
            for (std::size_t j = 0; j < inner; ++j) {
                s += grow[j] * wrow[j];
            }
            orow[k] += s;
        }
    }
}

void col_sum(const Matrix& g, Matrix& out, Accumulate acc) {
    check_colsum(g, out, acc);
    double* po = out.data();
    for (std::size_t b = 0; b < g.rows(); ++b) {
        const double* grow = g.data() + b * g.cols();
        for (std::size_t j = 0; j < g.cols(); ++j) {
            po[j] += grow[j];
        }
    }
}

void add_row_bias(Matrix& out, const Matrix& bias) {
    require_shape(bias, 1, out.cols(), "bias row");
    const double* pb = bias.data();
    for (std::size_t b = 0; b < out.rows(); ++b) {
        double* orow = out.data() + b * out.cols();
        for (std::size_t j = 0; j < out.cols(); ++j) {
            orow[j] += pb[j];
        }
    }
}

}  // namespace kernels

namespace reference {

void gemm_nn(const Matrix& a, const Matrix& w, Matrix& out, Accumulate acc) {
    check_nn(a, w, out, acc);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            for (std::size_t j = 0; j < w.cols(); ++j) {
                out(i, j) += a(i, k) * w(k, j);
            }
        }
    }
}

void gemm_tn(const Matrix& a, const Matrix& g, Matrix& out, Accumulate acc) {
    check_tn(a, g, out, acc);
    for (std::size_t b = 0; b < a.rows(); ++b) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            for (std::size_t j = 0; j < g.cols(); ++j) {
                out(k, j) += a(b, k) * g(b, j);
            }
        }
    }
}

void gemm_nt(const Matrix& g, const Matrix& w, Matrix& out, Accumulate acc) {
    check_nt(g, w, out, acc);
    for (std::size_t b = 0; b < g.rows(); ++b) {
        for (std::size_t k = 0; k < w.rows(); ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j) {
                s += g(b, j) * w(k, j);
            }
            out(b, k) += s;
        }
    }
}

void col_sum(const Matrix& g, Matrix& out, Accumulate acc) {
    check_colsum(g, out, acc);
    for (std::size_t b = 0; b < g.rows(); ++b) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
            out(0, j) += g(b, j);
        }
    }
}

}  // namespace reference

}  // namespace driftids::numgrad
