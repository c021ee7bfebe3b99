// Closed-form auxiliary fields on the narrow region.
//
// The primary field is the linear-in-height gap profile
//     ubar1(x, y) = (y - h2(x)) / delta(x),
// equal to 1 on the upper gap curve and 0 on the lower one, whose gradient
// carries the sharp 1/delta behavior.  For divergence-form coefficients the
// corrected field utilde1 adds a quadratic-in-height term proportional to
// A_21 (h1-h2)' that cancels the dominant cross-derivative residual in the
// neck.  uhat transports outer data across the gap in boundary mode.
//
// Outside the narrow region the fields are extended smoothly: a saturated
// vertical profile blended over a lateral collar of width R1/4, faded to
// zero toward the outer boundary.  Any smooth extension with the right
// boundary values works for the diagnostics these fields feed.

#pragma once

#include "narrowgap/harmonic.hpp"

namespace narrowgap {

class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AuxKind { UBar1, UBar2, UHat, UTilde1, UTilde2 };

class AuxiliaryField {
 public:
  AuxiliaryField(AuxKind kind, const Scene& scene);

  struct Eval {
    double value = 0.0;
    Vec2 grad{0.0, 0.0};
  };

  // analytic value and gradient; throws outside the closed narrow region
  // unless the extension is allowed
  Eval eval(Vec2 p, bool allow_extension = false) const;
  double value(Vec2 p, bool allow_extension = false) const {
    return eval(p, allow_extension).value;
  }

  // nodal interpolation onto a mesh (extension used automatically outside)
  std::vector<double> interpolate(const Mesh& mesh) const;

  AuxKind kind() const { return kind_; }
  const Scene& scene() const { return *scene_; }

 private:
  AuxKind kind_;
  const Scene* scene_;
  CoefficientField coeff_;
  double fade_inner_ = 0.0, fade_outer_ = 1.0;  // radial fade of the extension

  Eval eval_gap(Vec2 p) const;
  Eval eval_extension(Vec2 p) const;
};

// centered-difference residual of  div(A grad aux)  from the analytic
// gradient, step = 1e-6 * eps (throws ToleranceError on step underflow)
double divergence_residual(const AuxiliaryField& aux, const CoefficientField& A, Vec2 p);

struct ResidualScan {
  double max_on_sigma = 0.0;       // samples over the flat block
  double max_off_sigma = 0.0;      // samples over the rest of the neck
  double max_normalized = 0.0;     // max |r| * (eps + d^m) off the flat block
  double max_midline = 0.0;        // samples on the gap midline only
  int n_samples = 0;
};

// scan the narrow region on a lateral grid at the given relative heights
ResidualScan corrector_residual(const AuxiliaryField& aux, const CoefficientField& A,
                                int n_lateral = 400,
                                const std::vector<double>& sigmas = {0.25, 0.5, 0.75});

// max |grad(v - I aux)| over the region, plus the lateral profile
struct GradientComparison {
  double max = 0.0;
  GradientProfile profile;
};
GradientComparison compare_gradients(const Mesh& mesh, const FieldSolution& v,
                                     const AuxiliaryField& aux, const Region& region,
                                     int bins = 64);

// local energy of a difference field over the slab of halfwidth delta(z)
struct LocalEnergy {
  double energy = 0.0;
  double delta = 0.0;
  double delta_pow_n = 0.0;  // delta^2 in the plane
  double ratio = 0.0;        // energy / delta^n
};
LocalEnergy local_energy(const Mesh& mesh, const std::vector<Vec2>& diff_grads,
                         const Scene& scene, double z);

// per-triangle gradients of (v - I aux)
std::vector<Vec2> difference_gradients(const Mesh& mesh, const FieldSolution& v,
                                       const AuxiliaryField& aux);

// lateral profile CSV: x, d, delta, |grad ubar| max, |grad diff| max,
// local energy and delta^n at each station
void write_profile_csv(const std::string& path, const Mesh& mesh, const FieldSolution& v,
                       const AuxiliaryField& aux, const Scene& scene, int stations = 33);

}  // namespace narrowgap
