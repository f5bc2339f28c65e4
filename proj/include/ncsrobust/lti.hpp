#pragma once

// Finite-dimensional LTI systems: rational transfer functions, state-space
// realizations, interconnection algebra, frequency response, poles and
// minimal realizations.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ncsrobust/errors.hpp"

namespace ncsrobust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// ============================================================================
// Polynomials (coefficients in descending powers of s)
// ============================================================================

namespace poly {

/// Drops leading zero coefficients; the zero polynomial becomes {0}.
[[nodiscard]] inline std::vector<double> trim(std::vector<double> c) {
    auto first = std::find_if(c.begin(), c.end(), [](double x) { return x != 0.0; });
    if (first == c.end()) {
        return {0.0};
    }
    c.erase(c.begin(), first);
    return c;
}

[[nodiscard]] inline bool is_zero(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
}

[[nodiscard]] inline int degree(const std::vector<double>& c) {
    return static_cast<int>(trim(c).size()) - 1;
}

[[nodiscard]] inline std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

[[nodiscard]] inline Complex evaluate(const std::vector<double>& c, Complex s) {
    Complex acc{0.0, 0.0};
    for (double coeff : c) {
        acc = acc * s + coeff;
    }
    return acc;
}

} // namespace poly

// ============================================================================
// RationalTransfer
// ============================================================================

/// SISO proper rational transfer function num(s)/den(s).
class RationalTransfer {
public:
    RationalTransfer(std::vector<double> num, std::vector<double> den)
        : num_(poly::trim(std::move(num))), den_(poly::trim(std::move(den))) {
        if (poly::is_zero(den_)) {
            throw InputError("transfer function denominator is identically zero");
        }
        if (!poly::is_zero(num_) && poly::degree(num_) > poly::degree(den_)) {
            std::ostringstream msg;
            msg << "improper transfer function: numerator degree " << poly::degree(num_)
                << " exceeds denominator degree " << poly::degree(den_);
            throw InputError(msg.str());
        }
    }

    [[nodiscard]] static RationalTransfer constant(double k) { return {{k}, {1.0}}; }

    [[nodiscard]] const std::vector<double>& num() const noexcept { return num_; }
    [[nodiscard]] const std::vector<double>& den() const noexcept { return den_; }
    [[nodiscard]] int order() const noexcept { return static_cast<int>(den_.size()) - 1; }

    [[nodiscard]] Complex operator()(Complex s) const { return poly::evaluate(num_, s) / poly::evaluate(den_, s); }
    [[nodiscard]] Complex at_omega(double omega) const { return (*this)(Complex{0.0, omega}); }

    friend RationalTransfer operator*(const RationalTransfer& a, const RationalTransfer& b) {
        return {poly::multiply(a.num_, b.num_), poly::multiply(a.den_, b.den_)};
    }

private:
    std::vector<double> num_;
    std::vector<double> den_;
};

// ============================================================================
// StateSpace
// ============================================================================

/// Continuous-time realization x' = Ax + Bu, y = Cx + Du.
class StateSpace {
public:
    StateSpace() = default;

    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
        const auto n = a_.rows();
        if (a_.cols() != n || b_.rows() != n || c_.cols() != n || d_.rows() != c_.rows() ||
            d_.cols() != b_.cols()) {
            std::ostringstream msg;
            msg << "inconsistent state-space dimensions: A " << a_.rows() << "x" << a_.cols() << ", B "
                << b_.rows() << "x" << b_.cols() << ", C " << c_.rows() << "x" << c_.cols() << ", D "
                << d_.rows() << "x" << d_.cols();
            throw InputError(msg.str());
        }
    }

    [[nodiscard]] static StateSpace gain(const Matrix& d) {
        return {Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d};
    }
    [[nodiscard]] static StateSpace gain(double k) { return gain(Matrix::Constant(1, 1, k)); }

    [[nodiscard]] const Matrix& a() const noexcept { return a_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] const Matrix& c() const noexcept { return c_; }
    [[nodiscard]] const Matrix& d() const noexcept { return d_; }

    [[nodiscard]] Eigen::Index states() const noexcept { return a_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const noexcept { return b_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const noexcept { return c_.rows(); }

    /// Zero feedthrough.
    [[nodiscard]] bool strictly_proper() const { return d_.size() == 0 || d_.cwiseAbs().maxCoeff() == 0.0; }

    [[nodiscard]] StateSpace scaled(double alpha) const { return {a_, b_, alpha * c_, alpha * d_}; }

private:
    Matrix a_{0, 0};
    Matrix b_{0, 0};
    Matrix c_{0, 0};
    Matrix d_{0, 0};
};

/// Controllable canonical realization of a proper SISO transfer function.
[[nodiscard]] inline StateSpace tf_to_ss(const RationalTransfer& g) {
    const auto& den = g.den();
    const int n = g.order();
    const double lead = den.front();

    std::vector<double> num(static_cast<std::size_t>(n + 1), 0.0);
    std::copy(g.num().begin(), g.num().end(), num.end() - static_cast<std::ptrdiff_t>(g.num().size()));

    const double d0 = num[0] / lead;
    Matrix a = Matrix::Zero(n, n);
    Matrix b = Matrix::Zero(n, 1);
    Matrix c = Matrix::Zero(1, n);
    for (int i = 0; i < n; ++i) {
        const double ai = den[static_cast<std::size_t>(i + 1)] / lead;
        a(0, i) = -ai;
        c(0, i) = num[static_cast<std::size_t>(i + 1)] / lead - d0 * ai;
        if (i + 1 < n) {
            a(i + 1, i) = 1.0;
        }
    }
    if (n > 0) {
        b(0, 0) = 1.0;
    }
    return {a, b, c, Matrix::Constant(1, 1, d0)};
}

// ============================================================================
// Frequency grids
// ============================================================================

class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
        if (omegas_.size() < 2) {
            throw InputError("frequency grid needs at least 2 points");
        }
        for (std::size_t i = 0; i < omegas_.size(); ++i) {
            if (!std::isfinite(omegas_[i])) {
                throw InputError("frequency grid contains a non-finite value");
            }
            if (i > 0 && !(omegas_[i] > omegas_[i - 1])) {
                throw InputError("frequency grid must be strictly increasing");
            }
        }
    }

    [[nodiscard]] static FrequencyGrid log_spaced(double lo, double hi, std::size_t count) {
        if (!(lo > 0.0) || !(hi > lo) || count < 2) {
            throw InputError("log-spaced grid needs 0 < lo < hi and count >= 2");
        }
        std::vector<double> w(count);
        const double l0 = std::log10(lo);
        const double step = (std::log10(hi) - l0) / static_cast<double>(count - 1);
        for (std::size_t i = 0; i < count; ++i) {
            w[i] = std::pow(10.0, l0 + step * static_cast<double>(i));
        }
        return FrequencyGrid(std::move(w));
    }

    /// 400 log-spaced points over [1e-3, 1e3] rad/s.
    [[nodiscard]] static FrequencyGrid standard() { return log_spaced(1e-3, 1e3, 400); }

    [[nodiscard]] const std::vector<double>& omegas() const noexcept { return omegas_; }
    [[nodiscard]] std::size_t size() const noexcept { return omegas_.size(); }

private:
    std::vector<double> omegas_;
};

// ============================================================================
// Poles and frequency response
// ============================================================================

/// Eigenvalues of A with multiplicity.
[[nodiscard]] inline std::vector<Complex> poles(const StateSpace& sys) {
    if (sys.states() == 0) {
        return {};
    }
    Eigen::EigenSolver<Matrix> es(sys.a(), false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigenvalue iteration failed to converge");
    }
    std::vector<Complex> out(static_cast<std::size_t>(sys.states()));
    for (Eigen::Index i = 0; i < sys.states(); ++i) {
        out[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    }
    return out;
}

/// Largest singular value; 0 for an empty matrix.
[[nodiscard]] inline double sigma_max(const CMatrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    if (m.rows() == 1 && m.cols() == 1) {
        return std::abs(m(0, 0));
    }
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

[[nodiscard]] inline double sigma_max(const Matrix& m) { return sigma_max(CMatrix(m.cast<Complex>())); }

/// Evaluates D + C(sI - A)^{-1}B with the poles computed once up front.
class FrequencyResponse {
public:
    explicit FrequencyResponse(StateSpace sys) : sys_(std::move(sys)), poles_(ncsrobust::poles(sys_)) {
        b_ = sys_.b().cast<Complex>();
        c_ = sys_.c().cast<Complex>();
        d_ = sys_.d().cast<Complex>();
    }

    [[nodiscard]] CMatrix at(Complex s) const {
        for (const Complex& p : poles_) {
            if (std::abs(s - p) < 1e-8 * (1.0 + std::abs(p))) {
                std::ostringstream msg;
                msg << "frequency response requested at s = " << s << ", within tolerance of pole " << p;
                throw PoleProximityError(msg.str());
            }
        }
        if (sys_.states() == 0) {
            return d_;
        }
        CMatrix resolvent = -sys_.a().cast<Complex>();
        resolvent.diagonal().array() += s;
        return d_ + c_ * resolvent.partialPivLu().solve(b_);
    }

    [[nodiscard]] CMatrix at_omega(double omega) const { return at(Complex{0.0, omega}); }
    [[nodiscard]] const std::vector<Complex>& poles() const noexcept { return poles_; }
    [[nodiscard]] const StateSpace& system() const noexcept { return sys_; }

private:
    StateSpace sys_;
    std::vector<Complex> poles_;
    CMatrix b_, c_, d_;
};

/// Frequency response at s = j*omega.
[[nodiscard]] inline CMatrix evaluate(const StateSpace& sys, double omega) {
    return FrequencyResponse(sys).at_omega(omega);
}

// ============================================================================
// Interconnection algebra
// ============================================================================

[[nodiscard]] inline StateSpace block_diagonal(const std::vector<StateSpace>& parts) {
    Eigen::Index n = 0, m = 0, p = 0;
    for (const auto& s : parts) {
        n += s.states();
        m += s.inputs();
        p += s.outputs();
    }
    Matrix a = Matrix::Zero(n, n), b = Matrix::Zero(n, m), c = Matrix::Zero(p, n), d = Matrix::Zero(p, m);
    Eigen::Index on = 0, om = 0, op = 0;
    for (const auto& s : parts) {
        a.block(on, on, s.states(), s.states()) = s.a();
        b.block(on, om, s.states(), s.inputs()) = s.b();
        c.block(op, on, s.outputs(), s.states()) = s.c();
        d.block(op, om, s.outputs(), s.inputs()) = s.d();
        on += s.states();
        om += s.inputs();
        op += s.outputs();
    }
    return {a, b, c, d};
}

/// Closes the loop U = K Y + E w around G: U -> Y and exposes z = F Y + H w.
///
/// Every interconnection in the library (series, parallel, feedback, Gang of
/// Four, channel loops) is expressed through this one routine. Throws
/// WellPosednessError when I - D K is singular.
[[nodiscard]] inline StateSpace interconnect(const StateSpace& g, const Matrix& k, const Matrix& e, const Matrix& f,
                                             const Matrix& h) {
    const auto nu = g.inputs();
    const auto ny = g.outputs();
    if (k.rows() != nu || k.cols() != ny || e.rows() != nu || f.cols() != ny || h.rows() != f.rows() ||
        h.cols() != e.cols()) {
        throw InputError("interconnection matrices do not match the system dimensions");
    }
    Matrix loop = Matrix::Identity(ny, ny) - g.d() * k;
    if (ny > 0) {
        Eigen::JacobiSVD<Matrix> svd(loop);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0))) {
            throw WellPosednessError("feedback interconnection is not well-posed: I - D K is singular");
        }
    }
    const Matrix l = loop.partialPivLu().inverse();
    const Matrix a = g.a() + g.b() * k * l * g.c();
    const Matrix b = g.b() * (k * l * g.d() * e + e);
    const Matrix c = f * l * g.c();
    const Matrix d = f * l * g.d() * e + h;
    return {a, b, c, d};
}

enum class Composition { series, parallel, feedback };
enum class FeedbackSign { negative, positive };

/// series: u -> a -> b -> y.  parallel: y = a u + b u.
/// feedback: y = a(u + s b(y)) with s = -1 (negative) or +1 (positive).
[[nodiscard]] inline StateSpace compose(Composition kind, const StateSpace& a, const StateSpace& b,
                                        FeedbackSign sign = FeedbackSign::negative) {
    const auto ma = a.inputs(), pa = a.outputs(), mb = b.inputs(), pb = b.outputs();
    const StateSpace g = block_diagonal({a, b});
    switch (kind) {
    case Composition::series: {
        if (pa != mb) {
            throw InputError("series composition: output dimension of the first system must match input of the second");
        }
        Matrix k = Matrix::Zero(ma + mb, pa + pb);
        k.block(ma, 0, mb, pa) = Matrix::Identity(mb, pa);
        Matrix e = Matrix::Zero(ma + mb, ma);
        e.topRows(ma) = Matrix::Identity(ma, ma);
        Matrix f = Matrix::Zero(pb, pa + pb);
        f.rightCols(pb) = Matrix::Identity(pb, pb);
        return interconnect(g, k, e, f, Matrix::Zero(pb, ma));
    }
    case Composition::parallel: {
        if (ma != mb || pa != pb) {
            throw InputError("parallel composition requires equal dimensions");
        }
        Matrix e(ma + mb, ma);
        e << Matrix::Identity(ma, ma), Matrix::Identity(mb, ma);
        Matrix f(pa, pa + pb);
        f << Matrix::Identity(pa, pa), Matrix::Identity(pa, pb);
        return interconnect(g, Matrix::Zero(ma + mb, pa + pb), e, f, Matrix::Zero(pa, ma));
    }
    case Composition::feedback: {
        if (mb != pa || pb != ma) {
            throw InputError("feedback composition: b must map the outputs of a back to its inputs");
        }
        const double s = sign == FeedbackSign::negative ? -1.0 : 1.0;
        Matrix k = Matrix::Zero(ma + mb, pa + pb);
        k.block(0, pa, ma, pb) = s * Matrix::Identity(ma, pb);
        k.block(ma, 0, mb, pa) = Matrix::Identity(mb, pa);
        Matrix e = Matrix::Zero(ma + mb, ma);
        e.topRows(ma) = Matrix::Identity(ma, ma);
        Matrix f = Matrix::Zero(pa, pa + pb);
        f.leftCols(pa) = Matrix::Identity(pa, pa);
        return interconnect(g, k, e, f, Matrix::Zero(pa, ma));
    }
    }
    throw InputError("unknown composition kind");
}

// ============================================================================
// Minimal realization and stability
// ============================================================================

namespace detail {

/// Orthonormal basis for the range of m, keeping singular values above threshold.
[[nodiscard]] inline Matrix orth(const Matrix& m, double threshold) {
    if (m.rows() == 0 || m.cols() == 0) {
        return Matrix(m.rows(), 0);
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > threshold) {
            ++rank;
        }
    }
    return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of span{B, AB, A^2 B, ...} built block by block (staircase).
[[nodiscard]] inline Matrix krylov_basis(const Matrix& a, const Matrix& b, double rel_tol) {
    const auto n = a.rows();
    const double bnorm = b.norm();
    if (n == 0 || bnorm == 0.0) {
        return Matrix(n, 0);
    }
    const double threshold = rel_tol * std::max(1.0, a.norm());
    Matrix basis = orth(b / bnorm, rel_tol);
    Matrix frontier = basis;
    while (basis.cols() < n && frontier.cols() > 0) {
        Matrix w = a * frontier;
        for (int pass = 0; pass < 2; ++pass) {
            w -= basis * (basis.transpose() * w);
        }
        Matrix fresh = orth(w, threshold);
        if (fresh.cols() == 0) {
            break;
        }
        fresh -= basis * (basis.transpose() * fresh);
        fresh = orth(fresh, 0.5);
        const auto old = basis.cols();
        basis.conservativeResize(n, old + fresh.cols());
        basis.rightCols(fresh.cols()) = fresh;
        frontier = fresh;
    }
    return basis;
}

} // namespace detail

/// Diagonal similarity D^{-1} A D with power-of-two entries equalizing row and
/// column norms of A (Parlett-Reinsch).
[[nodiscard]] inline StateSpace balance(const StateSpace& sys) {
    Matrix a = sys.a();
    Matrix b = sys.b();
    Matrix c = sys.c();
    const auto n = a.rows();
    constexpr double radix = 2.0;
    bool done = false;
    for (int sweep = 0; !done && sweep < 100; ++sweep) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double col = a.col(i).cwiseAbs().sum() - std::abs(a(i, i));
            const double row = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
            if (col == 0.0 || row == 0.0) {
                continue;
            }
            const double total = col + row;
            double f = 1.0;
            double g = row / radix;
            while (col < g) {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while (col > g) {
                f /= radix;
                col /= radix * radix;
            }
            if ((col + row) / f < 0.95 * total) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
                b.row(i) /= f;
                c.col(i) *= f;
            }
        }
    }
    return {a, b, c, sys.d()};
}

/// Removes uncontrollable then unobservable modes with orthogonal staircase
/// projections; singular directions below rel_tol * ||A|| are discarded.
[[nodiscard]] inline StateSpace minimal_realization(const StateSpace& sys, double rel_tol = 1e-9) {
    if (sys.states() == 0) {
        return sys;
    }
    const StateSpace bal = balance(sys);
    const Matrix v = detail::krylov_basis(bal.a(), bal.b(), rel_tol);
    const Matrix ac = v.transpose() * bal.a() * v;
    const Matrix bc = v.transpose() * bal.b();
    const Matrix cc = bal.c() * v;
    const Matrix u = detail::krylov_basis(ac.transpose(), cc.transpose(), rel_tol);
    return {u.transpose() * ac * u, u.transpose() * bc, cc * u, sys.d()};
}

/// True iff every pole of the minimal realization satisfies Re(p) < -tol.
[[nodiscard]] inline bool is_hurwitz(const StateSpace& sys, double tol = 1e-9) {
    for (const Complex& p : poles(minimal_realization(sys))) {
        if (!(p.real() < -tol)) {
            return false;
        }
    }
    return true;
}

/// Realization of [I; P](I - CP)^{-1}[I  -C] with input (d1, d2) and output (u1, y1).
[[nodiscard]] inline StateSpace gang_of_four(const StateSpace& plant, const StateSpace& controller) {
    const auto m = plant.inputs();
    const auto p = plant.outputs();
    if (controller.inputs() != p || controller.outputs() != m) {
        throw InputError("gang_of_four: controller must map plant outputs to plant inputs");
    }
    const StateSpace g = block_diagonal({plant, controller});
    // Inputs U = [u_P; u_C], outputs Y = [y_P; y_C].
    // u_P = d1 + y_C, u_C = y_P - d2; z = [u_P; y_P].
    Matrix k = Matrix::Zero(m + p, p + m);
    k.block(0, p, m, m) = Matrix::Identity(m, m);
    k.block(m, 0, p, p) = Matrix::Identity(p, p);
    Matrix e = Matrix::Identity(m + p, m + p);
    e.bottomRightCorner(p, p) *= -1.0;
    Matrix f = Matrix::Zero(m + p, p + m);
    f.block(0, p, m, m) = Matrix::Identity(m, m);
    f.block(m, 0, p, p) = Matrix::Identity(p, p);
    Matrix h = Matrix::Zero(m + p, m + p);
    h.topLeftCorner(m, m) = Matrix::Identity(m, m);
    return interconnect(g, k, e, f, h);
}

// ============================================================================
// Delays
// ============================================================================

/// Diagonal [order/order] Pade approximant of exp(-tau s).
[[nodiscard]] inline RationalTransfer pade_delay(double tau, int order = 4) {
    if (order < 1 || order > 10) {
        throw InputError("Pade order must lie in [1, 10], got " + std::to_string(order));
    }
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw InputError("delay must be finite and non-negative");
    }
    if (tau == 0.0) {
        return RationalTransfer::constant(1.0);
    }
    const auto n = static_cast<std::size_t>(order);
    std::vector<double> num(n + 1), den(n + 1);
    double c = 1.0;
    double tau_k = 1.0;
    for (std::size_t k = 0; k <= n; ++k) {
        // descending storage: power k sits at index n - k
        num[n - k] = c * tau_k * ((k % 2 == 0) ? 1.0 : -1.0);
        den[n - k] = c * tau_k;
        c *= static_cast<double>(n - k) / (static_cast<double>(2 * n - k) * static_cast<double>(k + 1));
        tau_k *= tau;
    }
    return {num, den};
}

/// P(s) preceded by a Pade-approximated delay on every input channel.
[[nodiscard]] inline StateSpace with_input_delay(const StateSpace& plant, double tau, int order = 4) {
    if (tau == 0.0) {
        return plant;
    }
    // Unit-delay approximant, time-scaled: H(tau s) has realization (A/tau, B/tau, C, D).
    const StateSpace unit = balance(tf_to_ss(pade_delay(1.0, order)));
    const StateSpace one(unit.a() / tau, unit.b() / tau, unit.c(), unit.d());
    std::vector<StateSpace> lanes(static_cast<std::size_t>(plant.inputs()), one);
    return compose(Composition::series, block_diagonal(lanes), plant);
}

} // namespace ncsrobust
