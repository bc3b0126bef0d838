#pragma once

// Reference implementations written directly from the formulas, sharing no
// code with the library. Tests compare library output against these.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "semdrive/policy_net.hpp"
#include "semdrive/render.hpp"
#include "semdrive/sim.hpp"

namespace oracle {

inline constexpr double kBeta = 0.006;
inline constexpr double kGammaCollision = -0.025;

inline double reward(double v, double alpha, double dist, bool collided, double beta = kBeta,
                     double gamma = kGammaCollision) {
  if (collided) return gamma;
  return beta * (v * std::cos(alpha) - dist);
}

/// Distance from p to segment [a, b] via the clamped projection parameter.
inline double point_segment_distance(double px, double py, double ax, double ay, double bx,
                                     double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double l2 = dx * dx + dy * dy;
  double t = l2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

inline double centerline_distance(const semdrive::TrackSpec& track, double px, double py) {
  const auto& c = track.centerline;
  const std::size_t n = c.size();
  const std::size_t segs = track.closed ? n : n - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segs; ++i) {
    const auto& a = c[i];
    const auto& b = c[(i + 1) % n];
    best = std::min(best, point_segment_distance(px, py, a.x, a.y, b.x, b.y));
  }
  return best;
}

/// Minimum distance to points sampled every `spacing` meters along each segment,
/// and the index of the segment owning the first minimizing sample.
struct DenseResult {
  double dist;
  std::size_t segment;
};

inline DenseResult dense_centerline_distance(const semdrive::TrackSpec& track, double px, double py,
                                             double spacing) {
  const auto& c = track.centerline;
  const std::size_t n = c.size();
  const std::size_t segs = track.closed ? n : n - 1;
  DenseResult best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < segs; ++i) {
    const auto& a = c[i];
    const auto& b = c[(i + 1) % n];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int samples = std::max(1, static_cast<int>(std::ceil(len / spacing)));
    for (int k = 0; k <= samples; ++k) {
      const double t = static_cast<double>(k) / samples;
      const double d = std::hypot(px - (a.x + t * (b.x - a.x)), py - (a.y + t * (b.y - a.y)));
      if (d < best.dist) best = {d, i};
    }
  }
  return best;
}

/// Class of one pixel from first principles: pixel center in the vehicle
/// frame, rotated into the world, then tested against the bands.
inline semdrive::SemanticClass pixel_class(const semdrive::TrackSpec& track,
                                           const semdrive::VehicleState& s,
                                           const semdrive::RenderConfig& cfg, int row, int col) {
  const int n = cfg.resolution;
  const double ahead = (n - row - 0.5) * (cfg.view_ahead / n);
  const double right = (col + 0.5 - n / 2.0) * (2.0 * cfg.view_half_width / n);
  if (ahead >= 0.0 && ahead <= cfg.ego_length && std::abs(right) <= cfg.ego_width / 2.0) {
    return semdrive::SemanticClass::EgoVehicle;
  }
  const double ch = std::cos(s.heading);
  const double sh = std::sin(s.heading);
  const double wx = s.position.x + ahead * ch + right * sh;
  const double wy = s.position.y + ahead * sh - right * ch;
  const double d = centerline_distance(track, wx, wy);
  if (d <= cfg.marking_width) return semdrive::SemanticClass::LaneMarking;
  if (d <= track.width / 2.0) return semdrive::SemanticClass::Road;
  return semdrive::SemanticClass::OffRoad;
}

/// R_t = sum_k d^k r_{t+k} + d^(T-t) * bootstrap, summed term by term.
inline std::vector<double> brute_returns(const std::vector<double>& r, double bootstrap, double d) {
  const std::size_t T = r.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double sum = 0.0;
    for (std::size_t k = t; k < T; ++k) sum += std::pow(d, static_cast<double>(k - t)) * r[k];
    sum += std::pow(d, static_cast<double>(T - t)) * bootstrap;
    out[t] = sum;
  }
  return out;
}

struct RmsStep {
  double s;
  double theta;
};

inline RmsStep rmsprop(double s, double theta, double g, double lr, double decay, double eps) {
  const double s2 = decay * s + (1.0 - decay) * g * g;
  return {s2, theta - lr * g / std::sqrt(s2 + eps)};
}

/// Naive actor-critic network over plain double parameter vectors, laid out
/// like the library's layers: conv weights [F][C][K][K], dense weights [out][in].
struct NaiveNet {
  semdrive::NetArch arch;
  std::vector<std::vector<double>> p;  // one vector per layer, library order
  mutable std::vector<bool> active;    // ReLU on/off pattern of the last run

  double relu(double z) const {
    active.push_back(z > 0.0);
    return z > 0.0 ? z : 0.0;
  }

  static NaiveNet from(const semdrive::NetworkParams& params) {
    NaiveNet net{params.arch, {}};
    for (const auto& layer : params.layers) net.p.emplace_back(layer.data.begin(), layer.data.end());
    return net;
  }

  std::vector<double> conv(const std::vector<double>& in, int C, int S,
                           const std::vector<double>& w, const std::vector<double>& b, int F,
                           int K, int stride) const {
    const int O = (S - K) / stride + 1;
    std::vector<double> out(static_cast<std::size_t>(F) * O * O);
    for (int f = 0; f < F; ++f) {
      for (int oy = 0; oy < O; ++oy) {
        for (int ox = 0; ox < O; ++ox) {
          double z = b[f];
          for (int c = 0; c < C; ++c) {
            for (int ky = 0; ky < K; ++ky) {
              for (int kx = 0; kx < K; ++kx) {
                z += w[((f * C + c) * K + ky) * K + kx] *
                     in[(c * S + oy * stride + ky) * S + ox * stride + kx];
              }
            }
          }
          out[(f * O + oy) * O + ox] = relu(z);
        }
      }
    }
    return out;
  }

  std::vector<double> dense(const std::vector<double>& x, const std::vector<double>& w,
                            const std::vector<double>& b, bool rectify) const {
    std::vector<double> y(b.size());
    for (std::size_t r = 0; r < b.size(); ++r) {
      double z = b[r];
      for (std::size_t c = 0; c < x.size(); ++c) z += w[r * x.size() + c] * x[c];
      y[r] = rectify ? relu(z) : z;
    }
    return y;
  }

  /// Returns logits followed by the value estimate.
  std::vector<double> run(const std::vector<double>& input) const {
    const auto& a = arch;
    auto h1 = conv(input, a.in_channels, a.in_size, p[0], p[1], a.conv1_filters, a.conv1_kernel,
                   a.conv1_stride);
    auto h2 = conv(h1, a.conv1_filters, a.conv1_out(), p[2], p[3], a.conv2_filters,
                   a.conv2_kernel, a.conv2_stride);
    auto h3 = dense(h2, p[4], p[5], true);
    auto out = dense(h3, p[6], p[7], false);
    out.push_back(dense(h3, p[8], p[9], false)[0]);
    return out;
  }

  double loss(const std::vector<std::vector<double>>& inputs, const std::vector<int>& actions,
              const std::vector<double>& adv, const std::vector<double>& ret, double cv,
              double ce) const {
    active.clear();
    double total = 0.0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      std::vector<double> out = run(inputs[t]);
      const double v = out.back();
      out.pop_back();
      const double m = *std::max_element(out.begin(), out.end());
      double z = 0.0;
      for (double l : out) z += std::exp(l - m);
      const double log_z = m + std::log(z);
      double h = 0.0;
      for (double l : out) {
        const double lp = l - log_z;
        h -= std::exp(lp) * lp;
      }
      const double logp = out[static_cast<std::size_t>(actions[t])] - log_z;
      total += -logp * adv[t] + cv * (ret[t] - v) * (ret[t] - v) - ce * h;
    }
    return total / static_cast<double>(inputs.size());
  }
};

inline int angle_class(double deg) {  // 0 left, 1 straight, 2 right
  if (deg < -15.0) return 0;
  if (deg > 15.0) return 2;
  return 1;
}

}  // namespace oracle
