#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "midec/errors.hpp"

namespace midec {

// Regularized covariance of a band-passed 1 s epoch.
struct SpdSample {
  Eigen::MatrixXd c;
  int label{-1};
  int trial_index{-1};
  int run_id{-1};
};

// C = (1 - alpha) * Chat + alpha * (tr(Chat)/n) * I, with Chat the sample
// covariance of a channels x samples block (rows centered). Throws
// NumericalError when the result is not positive definite.
SpdSample epoch_covariance(const Eigen::Ref<const Eigen::MatrixXd>& epoch_signal,
                           double shrinkage);

// Affine-invariant distance ||log(A^{-1/2} B A^{-1/2})||_F.
double airm_distance(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b);

// Fixed-point iterate of the AIRM Frechet (geometric) mean. Converged when
// ||mean of logs||_F < tol; otherwise throws ConvergenceError carrying the
// last iterate and residual.
Eigen::MatrixXd frechet_mean(const std::vector<Eigen::MatrixXd>& samples,
                             double tol = 1e-8, int max_iter = 50);
Eigen::MatrixXd frechet_mean_of(const std::vector<SpdSample>& samples,
                                double tol = 1e-8, int max_iter = 50);

// Minimum-distance-to-mean classifier on the SPD manifold.
struct MdmModel {
  Eigen::MatrixXd mean0, mean1;
};

MdmModel mdm_fit(const std::vector<SpdSample>& samples, double tol = 1e-8,
                 int max_iter = 50);
// argmin over classes of the AIRM distance; tie -> class 0.
int mdm_predict(const MdmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& c);

std::string mdm_to_json(const MdmModel& model);
MdmModel mdm_from_json(const std::string& text);

// Running geodesic reference for adaptive re-centering of a covariance
// stream. Single-owner mutable; one state per stream.
struct RecenterState {
  Eigen::MatrixXd reference;  // SPD at all times
  std::int64_t count{0};      // completed updates

  static RecenterState identity(int dim);
  static RecenterState from(Eigen::MatrixXd reference, std::int64_t count);
};

// Returns C' = R^{-1/2} C R^{-1/2} under the state's current reference, then
// moves the reference along the geodesic toward C with step 1/(count+1)
// (incremental Frechet mean).
Eigen::MatrixXd recenter_update(RecenterState& state,
                                const Eigen::Ref<const Eigen::MatrixXd>& c);

// Symmetric eigendecomposition helpers with eigenvalues clamped at 1e-12.
Eigen::MatrixXd spd_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd spd_log(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd spd_pow(const Eigen::Ref<const Eigen::MatrixXd>& m, double exponent);

// True when m is symmetric (to 1e-12 relative) with all eigenvalues > 0.
bool is_spd(const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace midec
