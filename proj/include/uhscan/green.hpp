#pragma once

// Green's function construction at certified resolvent energies.
//
// Given a hyperbolicity certificate, one solution decaying to the right is
// grown backward from the far right edge of the window (started in the
// certified stable direction) and one decaying to the left is grown forward
// from the far left edge (started in the unstable direction).  After
// normalizing their Wronskian to 1 at site 0,
//     G(p, q) = u_left(min(p,q)) * u_right(max(p,q))
// is the kernel of a bounded inverse of (H - E) on the window, decaying
// exponentially away from the diagonal.
//
// Solutions are stored in log-magnitude + sign form so that windows far
// outside the spectrum (where the off-diagonal decay is extreme) cannot
// overflow.

#include "uhscan/uh.hpp"

namespace uhscan {

// Scaled sequence: value(n) = sign(n) * exp(log_abs(n)), sign in {-1,0,+1}.
struct ScaledSeq {
  long first = 0;
  std::vector<double> log_abs;
  std::vector<int> sign;

  long lo() const { return first; }
  long hi() const { return first + static_cast<long>(log_abs.size()) - 1; }
  bool covers(long n) const { return n >= lo() && n <= hi(); }
  double log_at(long n) const { return log_abs[static_cast<size_t>(n - first)]; }
  int sign_at(long n) const { return sign[static_cast<size_t>(n - first)]; }
  double value(long n) const;
};

struct GreenKernel {
  double energy = 0.0;
  Interval window;

  ScaledSeq u_left;    // decays to the left, grown from the left edge
  ScaledSeq u_right;   // decays to the right, grown from the right edge

  double decay_rate = 1.0;    // fitted off-diagonal rate, < 1
  double decay_const = 0.0;   // envelope constant:
                              // |G(p,q)| <= const * rate^{|p-q|} on sampled
                              // middle-half pairs
  double fit_residual = 0.0;  // max |residual| of the log-linear fit, in
                              // log10 units
  double wronskian_drift = 0.0;  // max |W(n) - 1| across the window

  json model;

  double entry(long p, long q) const;   // G(p, q)
  double unstable(long n) const { return u_left.value(n); }
  double stable(long n) const { return u_right.value(n); }

  json header_json() const;
};

// Build the kernel on `window` from a certificate whose window covers it
// with margin >= depth on both sides.  Throws std::invalid_argument when the
// margin or energy disagree, DegenerateDirections when the certified stable
// and unstable directions at the anchor site are closer than 1e-8.
GreenKernel build_kernel(const PotentialSource& src, const UHCertificate& cert,
                         Interval window);

// y = G x for a vector supported on the window (zero extension outside).
std::vector<double> apply(const GreenKernel& g, const std::vector<double>& x);

// max over `trials` deterministic pseudo-random unit vectors x of
// ||(H - E) G x - x||_2 over the middle third of the window (the interior,
// away from truncation effects).
double verify_inverse(const PotentialSource& src, const GreenKernel& g,
                      int trials = 20, unsigned seed = 1);

// Schur-test bound on the operator norm of G: max over rows of the absolute
// kernel sums (symmetric kernel, so row and column sums agree).
double operator_norm_bound(const GreenKernel& g);

}  // namespace uhscan
