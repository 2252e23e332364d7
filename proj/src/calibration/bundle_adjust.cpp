#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "crosswarn/calibration/calibration.hpp"
#include "projection.hpp"

namespace crosswarn::calibration {

namespace {

constexpr int kIntrinsicParams = 3;
constexpr int kPoseParams = 6;
constexpr double kLambdaCeiling = 1e12;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

double soft_l1(double s) { return 2.0 * (std::sqrt(1.0 + s) - 1.0); }

}  // namespace

ReprojectionProblem::ReprojectionProblem(const std::vector<CalibrationFrame>& frames,
                                         LensModel lens)
    : frames_(frames), lens_(lens) {
  for (const auto& f : frames_) {
    if (f.board_points.size() != f.image_points.size() || f.board_points.size() < 4) {
      throw std::invalid_argument("calibration frame needs >= 4 matched points");
    }
    num_points_ += static_cast<int>(f.board_points.size());
  }
}

int ReprojectionProblem::num_parameters() const {
  return kIntrinsicParams + kPoseParams * static_cast<int>(frames_.size());
}

int ReprojectionProblem::num_residuals() const { return 2 * num_points_; }

ReprojectionProblem::State ReprojectionProblem::apply(const State& s,
                                                      const Eigen::VectorXd& delta) const {
  State out = s;
  out.intrinsics.cx += delta(0);
  out.intrinsics.cy += delta(1);
  out.intrinsics.focal_px += delta(2);
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const int o = kIntrinsicParams + kPoseParams * static_cast<int>(i);
    out.rotations[i] = exp_so3(delta.segment<3>(o)) * s.rotations[i];
    out.translations[i] += delta.segment<3>(o + 3);
  }
  return out;
}

double ReprojectionProblem::sum_squared(const State& s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    for (std::size_t j = 0; j < f.board_points.size(); ++j) {
      const Eigen::Vector3d p = s.rotations[i] * f.board_points[j] + s.translations[i];
      total += (detail::project(lens_, s.intrinsics, p).uv - f.image_points[j]).squaredNorm();
    }
  }
  return total;
}

double ReprojectionProblem::cost(const State& s, const Loss& loss) const {
  if (loss.robust_scale <= 0.0) return sum_squared(s);
  const double s2 = loss.robust_scale * loss.robust_scale;
  double total = 0.0;
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    for (std::size_t j = 0; j < f.board_points.size(); ++j) {
      const Eigen::Vector3d p = s.rotations[i] * f.board_points[j] + s.translations[i];
      const double e2 = (detail::project(lens_, s.intrinsics, p).uv - f.image_points[j]).squaredNorm();
      total += s2 * soft_l1(e2 / s2);
    }
  }
  return total;
}

void ReprojectionProblem::normal_equations(const State& s, const Loss& loss,
                                           Eigen::MatrixXd& hessian,
                                           Eigen::VectorXd& gradient) const {
  const int n = num_parameters();
  hessian.setZero(n, n);
  gradient.setZero(n);
  const bool robust = loss.robust_scale > 0.0;
  const double s2 = loss.robust_scale * loss.robust_scale;

  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    const int o = kIntrinsicParams + kPoseParams * static_cast<int>(i);
    Eigen::Matrix<double, 3, 3> hii = Eigen::Matrix3d::Zero();
    Eigen::Matrix<double, 3, 6> hip = Eigen::Matrix<double, 3, 6>::Zero();
    Eigen::Matrix<double, 6, 6> hpp = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Vector3d gi = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 6, 1> gp = Eigen::Matrix<double, 6, 1>::Zero();

    for (std::size_t j = 0; j < f.board_points.size(); ++j) {
      const Eigen::Vector3d rx = s.rotations[i] * f.board_points[j];
      const Eigen::Vector3d p = rx + s.translations[i];
      const auto proj = detail::project(lens_, s.intrinsics, p);
      const Eigen::Vector2d e = proj.uv - f.image_points[j];

      double w = 1.0;
      if (robust) w = 1.0 / std::sqrt(1.0 + e.squaredNorm() / s2);

      const Eigen::Matrix<double, 2, 3>& ji = proj.d_intrinsics;
      Eigen::Matrix<double, 2, 6> jp;
      jp.leftCols<3>() = -proj.d_point * skew(rx);
      jp.rightCols<3>() = proj.d_point;

      hii.noalias() += 2.0 * w * ji.transpose() * ji;
      hip.noalias() += 2.0 * w * ji.transpose() * jp;
      hpp.noalias() += 2.0 * w * jp.transpose() * jp;
      gi.noalias() += 2.0 * w * ji.transpose() * e;
      gp.noalias() += 2.0 * w * jp.transpose() * e;
    }
    hessian.topLeftCorner<3, 3>() += hii;
    hessian.block<3, 6>(0, o) += hip;
    hessian.block<6, 3>(o, 0) += hip.transpose();
    hessian.block<6, 6>(o, o) += hpp;
    gradient.head<3>() += gi;
    gradient.segment<6>(o) += gp;
  }
}

namespace {

struct LmOutcome {
  ReprojectionProblem::State state;
  bool converged = false;
};

LmOutcome run_lm(const ReprojectionProblem& problem, ReprojectionProblem::State state,
                 const ReprojectionProblem::Loss& loss, const LmOptions& options, int pass,
                 std::vector<TraceEntry>& trace) {
  double lambda = options.initial_lambda;
  double cost = problem.cost(state, loss);
  trace.push_back({pass, 0, cost, lambda, true});

  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  bool rebuild = true;
  for (int it = 1; it <= options.max_iterations; ++it) {
    if (rebuild) problem.normal_equations(state, loss, hessian, gradient);
    if (gradient.lpNorm<Eigen::Infinity>() == 0.0) return {state, true};

    Eigen::MatrixXd damped = hessian;
    const double floor = 1e-12 * hessian.diagonal().maxCoeff();
    for (int d = 0; d < damped.rows(); ++d) {
      damped(d, d) += lambda * std::max(hessian(d, d), floor);
    }
    const Eigen::VectorXd step = damped.ldlt().solve(-gradient);
    const auto candidate = problem.apply(state, step);
    const double candidate_cost = problem.cost(candidate, loss);

    if (std::isfinite(candidate_cost) && candidate_cost < cost) {
      const double relative = (cost - candidate_cost) / std::max(cost, 1e-300);
      state = candidate;
      cost = candidate_cost;
      lambda = std::max(lambda / 10.0, 1e-15);
      trace.push_back({pass, it, cost, lambda, true});
      rebuild = true;
      if (relative < options.relative_tolerance) return {state, true};
    } else {
      lambda *= 10.0;
      trace.push_back({pass, it, cost, lambda, false});
      rebuild = false;
      // no descent even for a vanishing step: already at the minimum
      if (lambda > kLambdaCeiling) return {state, true};
    }
  }
  return {state, false};
}

CalibrationResult make_result(const std::vector<CalibrationFrame>& frames, LensModel lens,
                              const ReprojectionProblem& problem,
                              const ReprojectionProblem::State& s) {
  CalibrationResult r;
  r.lens = lens;
  r.intrinsics = s.intrinsics;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    r.poses.push_back(Pose::from(s.rotations[i], s.translations[i]));
  }
  r.rms_px = std::sqrt(problem.sum_squared(s) / problem.num_residuals());
  return r;
}

}  // namespace

Eigen::Vector2d project_point(LensModel lens, const Intrinsics& k, const Eigen::Vector3d& p) {
  return detail::project(lens, k, p).uv;
}

Pose initial_pose(const CalibrationFrame& frame, const CameraModel& initial) {
  CameraModel equidistant = initial;
  equidistant.lens = LensModel::kEquidistant;
  const std::size_t n = frame.board_points.size();
  Eigen::MatrixXd a(3 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& uv = frame.image_points[i];
    auto bearing = geometry::try_pixel_to_ray(equidistant, uv.x(), uv.y());
    if (!bearing) throw std::runtime_error("image point outside the lens domain");
    const Eigen::Matrix3d b = skew(*bearing);
    const double x = frame.board_points[i].x();
    const double y = frame.board_points[i].y();
    a.block<3, 3>(3 * i, 0) = x * b;
    a.block<3, 3>(3 * i, 3) = y * b;
    a.block<3, 3>(3 * i, 6) = b;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::VectorXd h = svd.matrixV().col(8);

  // the homography maps board points onto positive multiples of the bearings
  double orientation = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& uv = frame.image_points[i];
    const Eigen::Vector3d bearing = *geometry::try_pixel_to_ray(equidistant, uv.x(), uv.y());
    const Eigen::Vector3d mapped = frame.board_points[i].x() * h.segment<3>(0) +
                                   frame.board_points[i].y() * h.segment<3>(3) + h.segment<3>(6);
    orientation += bearing.dot(mapped);
  }
  if (orientation < 0.0) h = -h;

  const double scale = 2.0 / (h.segment<3>(0).norm() + h.segment<3>(3).norm());
  const Eigen::Vector3d r1 = scale * h.segment<3>(0);
  const Eigen::Vector3d r2 = scale * h.segment<3>(3);
  Eigen::Matrix3d r;
  r.col(0) = r1;
  r.col(1) = r2;
  r.col(2) = r1.cross(r2);
  const Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d rot = rsvd.matrixU() * rsvd.matrixV().transpose();
  if (rot.determinant() < 0.0) {
    Eigen::Matrix3d u = rsvd.matrixU();
    u.col(2) = -u.col(2);
    rot = u * rsvd.matrixV().transpose();
  }
  return Pose::from(rot, scale * h.segment<3>(6));
}

double reprojection_rms(const std::vector<CalibrationFrame>& frames, LensModel lens,
                        const Intrinsics& k, const std::vector<Pose>& poses) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Eigen::Matrix3d r = poses[i].rotation_matrix();
    for (std::size_t j = 0; j < frames[i].board_points.size(); ++j) {
      const Eigen::Vector3d p = r * frames[i].board_points[j] + poses[i].translation;
      total += (detail::project(lens, k, p).uv - frames[i].image_points[j]).squaredNorm();
      count += 2;
    }
  }
  return std::sqrt(total / static_cast<double>(count));
}

CalibrationResult bundle_adjust(const std::vector<CalibrationFrame>& frames, LensModel lens,
                                const CameraModel& initial, const LmOptions& options) {
  if (frames.size() < 3) throw std::invalid_argument("bundle adjustment needs >= 3 frames");
  const ReprojectionProblem problem(frames, lens);

  ReprojectionProblem::State state;
  state.intrinsics = {initial.optical_center.x(), initial.optical_center.y(), initial.focal_px};
  for (const auto& f : frames) {
    const Pose p = initial_pose(f, initial);
    state.rotations.push_back(p.rotation_matrix());
    state.translations.push_back(p.translation);
  }
  const double initial_rms = std::sqrt(problem.sum_squared(state) / problem.num_residuals());

  std::vector<TraceEntry> trace;
  auto first = run_lm(problem, state, {}, options, 1, trace);
  CalibrationResult result = make_result(frames, lens, problem, first.state);
  result.initial_rms_px = initial_rms;
  if (!first.converged) {
    result.trace = trace;
    throw CalibrationError("least-squares pass did not converge", result);
  }

  if (options.robust_pass) {
    // residuals are normalised by the first-pass RMS before the soft-l1 loss
    const ReprojectionProblem::Loss robust{std::max(result.rms_px, 1e-9)};
    auto second = run_lm(problem, first.state, robust, options, 2, trace);
    result = make_result(frames, lens, problem, second.state);
    result.initial_rms_px = initial_rms;
    if (!second.converged) {
      result.trace = trace;
      throw CalibrationError("robust pass did not converge", result);
    }
  }
  result.trace = std::move(trace);
  return result;
}

std::map<LensModel, double> compare_models(const std::vector<CalibrationFrame>& frames,
                                           const CameraModel& initial,
                                           const LmOptions& options) {
  std::map<LensModel, double> out;
  for (LensModel lens : geometry::kAllLensModels) {
    try {
      out[lens] = bundle_adjust(frames, lens, initial, options).rms_px;
    } catch (const CalibrationError&) {
      out[lens] = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

void write_trace_jsonl(const std::filesystem::path& path, const std::vector<TraceEntry>& trace) {
  std::ofstream out(path);
  for (const auto& t : trace) {
    out << nlohmann::json{{"pass", t.pass},
                          {"iteration", t.iteration},
                          {"cost", t.cost},
                          {"lambda", t.lambda},
                          {"accepted", t.accepted}}
               .dump()
        << '\n';
  }
}

}  // namespace crosswarn::calibration
