#ifndef KAMRED_FOURIER_HPP
#define KAMRED_FOURIER_HPP

// Matrix-valued Fourier series on the frequency torus.
//
// A FourierMatrix stores finitely many coefficients A_hat(k), k in Z^n, of a
// map theta -> A(theta) = sum_k A_hat(k) e^{i<k,theta>} with values in the
// complex J x J matrices.  Every coefficient carries its derivative with
// respect to the ray parameter tau alongside the value, and every operation
// propagates both, so downstream consumers (divisor excision, eigenvalue
// corrections) always have a Lipschitz handle in tau.
//
// All norms used for certification are of the form
//     |A|_{W,s} = sum_k  || D A_hat(k) D^{-1} ||_2  e^{|k|_1 s},
// with D = diag(1^W, ..., J^W).  The helpers here never drop coefficient
// mass silently: operations that truncate return the certified norm of what
// was folded away.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kamred {

// ---------------------------------------------------------------------------
// frequency multi-indices

using ModeIndex = std::vector<std::int32_t>;

inline ModeIndex zero_mode(int nfreq) { return ModeIndex(static_cast<std::size_t>(nfreq), 0); }

inline ModeIndex mode1(std::int32_t k) { return ModeIndex{k}; }

inline int l1_norm(const ModeIndex& k) {
  int s = 0;
  for (auto c : k) s += std::abs(c);
  return s;
}

inline ModeIndex negated(const ModeIndex& k) {
  ModeIndex r(k);
  for (auto& c : r) c = -c;
  return r;
}

inline ModeIndex mode_sum(const ModeIndex& a, const ModeIndex& b) {
  ModeIndex r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

template <typename Scalar>
Scalar dot(const ModeIndex& k, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) {
  Scalar s = 0;
  for (std::size_t i = 0; i < k.size(); ++i) s += static_cast<Scalar>(k[i]) * w(static_cast<Eigen::Index>(i));
  return s;
}

// ---------------------------------------------------------------------------
// certification norm parameters: weight exponent W and strip half-width s

template <typename Scalar>
struct NormSpec {
  int weight = 0;
  Scalar strip = 0;
};

// ---------------------------------------------------------------------------

template <typename Scalar>
struct FourierMatrix {
  using Complex = std::complex<Scalar>;
  using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  struct Coeff {
    CMat val;
    CMat der;  // d/dtau
  };

  Eigen::Index dim = 0;
  int nfreq = 1;
  // Half-width of the strip on which the stored norms are certified.  Trig
  // polynomials built directly from data are entire, hence infinity.
  Scalar strip = std::numeric_limits<Scalar>::infinity();
  bool symmetric = false;
  std::map<ModeIndex, Coeff> coeffs;

  const Coeff* find(const ModeIndex& k) const {
    auto it = coeffs.find(k);
    return it == coeffs.end() ? nullptr : &it->second;
  }

  Coeff& at_or_insert(const ModeIndex& k) {
    auto it = coeffs.find(k);
    if (it == coeffs.end()) {
      Coeff c;
      c.val = CMat::Zero(dim, dim);
      c.der = CMat::Zero(dim, dim);
      it = coeffs.emplace(k, std::move(c)).first;
    }
    return it->second;
  }

  int support_radius() const {
    int r = 0;
    for (const auto& [k, c] : coeffs) r = std::max(r, l1_norm(k));
    return r;
  }
};

template <typename Scalar>
FourierMatrix<Scalar> fm_zero(Eigen::Index dim, int nfreq) {
  FourierMatrix<Scalar> a;
  a.dim = dim;
  a.nfreq = nfreq;
  return a;
}

template <typename Scalar>
FourierMatrix<Scalar> fm_identity(Eigen::Index dim, int nfreq) {
  FourierMatrix<Scalar> a = fm_zero<Scalar>(dim, nfreq);
  a.at_or_insert(zero_mode(nfreq)).val.setIdentity();
  a.symmetric = true;
  return a;
}

// A += c * B, with c constant in tau.
template <typename Scalar>
void add_scaled(FourierMatrix<Scalar>& a, std::complex<Scalar> c, const FourierMatrix<Scalar>& b) {
  for (const auto& [k, cb] : b.coeffs) {
    auto& ca = a.at_or_insert(k);
    ca.val += c * cb.val;
    ca.der += c * cb.der;
  }
  a.strip = std::min(a.strip, b.strip);
}

template <typename Scalar>
FourierMatrix<Scalar> scaled(const FourierMatrix<Scalar>& a, std::complex<Scalar> c) {
  FourierMatrix<Scalar> r = a;
  for (auto& [k, ca] : r.coeffs) {
    ca.val *= c;
    ca.der *= c;
  }
  return r;
}

// Pointwise value A(theta) = sum_k A_hat(k) e^{i <k, theta>} at a real angle.
template <typename Scalar>
typename FourierMatrix<Scalar>::CMat fm_at(const FourierMatrix<Scalar>& a,
                                           const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  using Complex = std::complex<Scalar>;
  using CMat = typename FourierMatrix<Scalar>::CMat;
  CMat v = CMat::Zero(a.dim, a.dim);
  for (const auto& [k, c] : a.coeffs) v += std::exp(Complex(0, dot(k, theta))) * c.val;
  return v;
}

// ---------------------------------------------------------------------------
// spectral norm of a small dense matrix, via the Gram matrix

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Mat gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().real().maxCoeff();
  return top > 0 ? std::sqrt(top) : 0.0;
}

// ---------------------------------------------------------------------------
// weighted operator norm of a single coefficient:  || D M D^{-1} ||_2

template <typename Scalar>
Scalar weighted_block_norm(const typename FourierMatrix<Scalar>::CMat& m, int weight) {
  if (m.rows() == 0) return 0;
  if (weight == 0) return static_cast<Scalar>(spectral_norm(m));
  using CMat = typename FourierMatrix<Scalar>::CMat;
  CMat w = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      // (i+1, j+1) are the 1-based Dirichlet mode labels carrying weight p^W.
      Scalar ratio = std::pow(static_cast<Scalar>(i + 1) / static_cast<Scalar>(j + 1),
                              static_cast<Scalar>(weight));
      w(i, j) *= ratio;
    }
  }
  return static_cast<Scalar>(spectral_norm(w));
}

// Certified upper bound sum_k ||D A_hat(k) D^{-1}||_2 e^{|k|_1 s}.
// Requires s <= A.strip: the norm is only meaningful on the certified strip.
template <typename Scalar>
Scalar weighted_norm(const FourierMatrix<Scalar>& a, int weight, Scalar s) {
  if (!(s <= a.strip))
    throw std::invalid_argument("weighted_norm: requested strip exceeds certified strip");
  Scalar total = 0;
  for (const auto& [k, c] : a.coeffs)
    total += weighted_block_norm<Scalar>(c.val, weight) * std::exp(static_cast<Scalar>(l1_norm(k)) * s);
  return total;
}

// Same bound applied to the tau-derivative part.
template <typename Scalar>
Scalar weighted_norm_der(const FourierMatrix<Scalar>& a, int weight, Scalar s) {
  if (!(s <= a.strip))
    throw std::invalid_argument("weighted_norm_der: requested strip exceeds certified strip");
  Scalar total = 0;
  for (const auto& [k, c] : a.coeffs)
    total += weighted_block_norm<Scalar>(c.der, weight) * std::exp(static_cast<Scalar>(l1_norm(k)) * s);
  return total;
}

// ---------------------------------------------------------------------------
// truncation operator Gamma_K: split A into (Gamma_K A, (1 - Gamma_K) A).
// The two parts partition the stored modes exactly; nothing is lost.

template <typename Scalar>
std::pair<FourierMatrix<Scalar>, FourierMatrix<Scalar>> truncation(const FourierMatrix<Scalar>& a,
                                                                   int cutoff) {
  FourierMatrix<Scalar> low = fm_zero<Scalar>(a.dim, a.nfreq);
  FourierMatrix<Scalar> high = fm_zero<Scalar>(a.dim, a.nfreq);
  low.strip = a.strip;
  high.strip = a.strip;
  low.symmetric = a.symmetric;
  high.symmetric = a.symmetric;
  for (const auto& [k, c] : a.coeffs) {
    if (l1_norm(k) <= cutoff)
      low.coeffs.emplace(k, c);
    else
      high.coeffs.emplace(k, c);
  }
  return {std::move(low), std::move(high)};
}

// ---------------------------------------------------------------------------
// product of two series with a mode budget.
//
// Coefficients of the convolution that would land beyond |k|_1 > keep_cutoff
// are not stored; their certified norm (value and derivative parts) is
// accumulated and returned so the caller can fold it into a tail budget.

template <typename Scalar>
struct ProductResult {
  FourierMatrix<Scalar> series;
  Scalar folded = 0;      // certified norm of dropped value mass
  Scalar folded_der = 0;  // certified norm of dropped derivative mass
};

template <typename Scalar>
ProductResult<Scalar> fourier_multiply(const FourierMatrix<Scalar>& a, const FourierMatrix<Scalar>& b,
                                       int keep_cutoff, const NormSpec<Scalar>& ns) {
  ProductResult<Scalar> out;
  out.series = fm_zero<Scalar>(a.dim, a.nfreq);
  out.series.strip = std::min(a.strip, b.strip);
  for (const auto& [ka, ca] : a.coeffs) {
    for (const auto& [kb, cb] : b.coeffs) {
      ModeIndex k = mode_sum(ka, kb);
      typename FourierMatrix<Scalar>::CMat v = ca.val * cb.val;
      typename FourierMatrix<Scalar>::CMat d = ca.der * cb.val + ca.val * cb.der;
      if (l1_norm(k) > keep_cutoff) {
        Scalar e = std::exp(static_cast<Scalar>(l1_norm(k)) * std::min(ns.strip, out.series.strip));
        out.folded += weighted_block_norm<Scalar>(v, ns.weight) * e;
        out.folded_der += weighted_block_norm<Scalar>(d, ns.weight) * e;
        continue;
      }
      auto& cc = out.series.at_or_insert(k);
      cc.val += v;
      cc.der += d;
    }
  }
  return out;
}

// Commutator [f, a] = f a - a f under the same mode budget.
template <typename Scalar>
ProductResult<Scalar> commutator(const FourierMatrix<Scalar>& f, const FourierMatrix<Scalar>& a,
                                 int keep_cutoff, const NormSpec<Scalar>& ns) {
  ProductResult<Scalar> fa = fourier_multiply(f, a, keep_cutoff, ns);
  ProductResult<Scalar> af = fourier_multiply(a, f, keep_cutoff, ns);
  add_scaled(fa.series, std::complex<Scalar>(-1, 0), af.series);
  fa.folded += af.folded;
  fa.folded_der += af.folded_der;
  return fa;
}

// ---------------------------------------------------------------------------
// pointwise adjoint as a series:  (A*)(theta) = A(theta)^H  for real theta
// corresponds to  (A*)_hat(k) = A_hat(-k)^H.

template <typename Scalar>
FourierMatrix<Scalar> adjoint_series(const FourierMatrix<Scalar>& a) {
  FourierMatrix<Scalar> r = fm_zero<Scalar>(a.dim, a.nfreq);
  r.strip = a.strip;
  for (const auto& [k, c] : a.coeffs) {
    auto& rc = r.at_or_insert(negated(k));
    rc.val = c.val.adjoint();
    rc.der = c.der.adjoint();
  }
  return r;
}

// Angular derivative along the flow:  (omega . d/dtheta) A, with
// omega = tau * omega0.  The tau-derivative picks up the omega0 term.
template <typename Scalar>
FourierMatrix<Scalar> omega_dtheta(const FourierMatrix<Scalar>& a,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& omega,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& omega0) {
  using Complex = std::complex<Scalar>;
  FourierMatrix<Scalar> r = fm_zero<Scalar>(a.dim, a.nfreq);
  r.strip = a.strip;
  for (const auto& [k, c] : a.coeffs) {
    Complex iw(0, dot(k, omega));
    Complex iw0(0, dot(k, omega0));
    auto& rc = r.at_or_insert(k);
    rc.val = iw * c.val;
    rc.der = iw * c.der + iw0 * c.val;
  }
  return r;
}

// ---------------------------------------------------------------------------
// evaluation at a real angle

template <typename Scalar>
typename FourierMatrix<Scalar>::CMat eval(const FourierMatrix<Scalar>& a,
                                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& theta) {
  using Complex = std::complex<Scalar>;
  typename FourierMatrix<Scalar>::CMat m =
      FourierMatrix<Scalar>::CMat::Zero(a.dim, a.dim);
  for (const auto& [k, c] : a.coeffs) {
    Scalar phase = dot(k, theta);
    m += std::exp(Complex(0, phase)) * c.val;
  }
  return m;
}

// ---------------------------------------------------------------------------
// structural checks

// max_k || A_hat(k)^H - A_hat(-k) ||_max : zero iff A(theta) is Hermitian
// for every real theta.
template <typename Scalar>
Scalar hermiticity_defect(const FourierMatrix<Scalar>& a) {
  Scalar worst = 0;
  for (const auto& [k, c] : a.coeffs) {
    const auto* cm = a.find(negated(k));
    typename FourierMatrix<Scalar>::CMat other =
        cm ? cm->val : FourierMatrix<Scalar>::CMat::Zero(a.dim, a.dim).eval();
    worst = std::max(worst, (c.val.adjoint() - other).cwiseAbs().maxCoeff());
  }
  return worst;
}

// max_k || A_hat(k) - A_hat(k)^T ||_max
template <typename Scalar>
Scalar symmetry_defect(const FourierMatrix<Scalar>& a) {
  Scalar worst = 0;
  for (const auto& [k, c] : a.coeffs)
    worst = std::max(worst, (c.val - c.val.transpose().eval()).cwiseAbs().maxCoeff());
  return worst;
}

// ---------------------------------------------------------------------------
// lossy cleanup with receipt.
//
// Drops the smallest coefficients while their cumulative certified norm stays
// at or below drop_tol, returning what was given up.  Used inside series
// summations to stop junk modes from inflating supports; the receipts are
// accounted into the assembling step's tail.

template <typename Scalar>
Scalar compress(FourierMatrix<Scalar>& a, Scalar drop_tol, const NormSpec<Scalar>& ns) {
  struct Entry {
    Scalar contribution;
    ModeIndex k;
  };
  std::vector<Entry> entries;
  Scalar s = std::min(ns.strip, a.strip);
  for (const auto& [k, c] : a.coeffs) {
    Scalar e = std::exp(static_cast<Scalar>(l1_norm(k)) * s);
    Scalar w = (weighted_block_norm<Scalar>(c.val, ns.weight) +
                weighted_block_norm<Scalar>(c.der, ns.weight)) *
               e;
    entries.push_back({w, k});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    if (x.contribution != y.contribution) return x.contribution < y.contribution;
    return x.k < y.k;
  });
  Scalar dropped = 0;
  for (const auto& e : entries) {
    if (dropped + e.contribution > drop_tol) break;
    dropped += e.contribution;
    a.coeffs.erase(e.k);
  }
  return dropped;
}

// ---------------------------------------------------------------------------
// diagonal of the zero mode, the ingredient of the eigenvalue update

template <typename Scalar>
std::pair<Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>,
          Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>>
zero_mode_diagonal(const FourierMatrix<Scalar>& a) {
  using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
  CVec v = CVec::Zero(a.dim);
  CVec d = CVec::Zero(a.dim);
  if (const auto* c = a.find(zero_mode(a.nfreq))) {
    v = c->val.diagonal();
    d = c->der.diagonal();
  }
  return {v, d};
}

}  // namespace kamred

#endif
