#include "semirobin/search.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "semirobin/errors.hpp"

namespace semirobin {

DescentResult descend(const Objective& f, const Vector& x0, const DescentOptions& opt, const Metric& metric) {
  DescentResult r;
  r.x = x0;
  Evaluation cur = f(r.x);
  ++r.evaluations;
  if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) throw ConvergenceError("objective not finite at start", 0.0);
  std::deque<double> recent{cur.value};
  double gn = metric.norm(cur.gradient);
  double alpha = 1.0;
  Vector prev_x, prev_g;

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (gn <= opt.grad_tol) break;
    if (it > 0) {
      const Vector s = r.x - prev_x, y = cur.gradient - prev_g;
      const Vector py = metric.apply(y);
      const double sy = s.dot(y), ypy = y.dot(py);
      alpha = (sy > 0.0 && ypy > 0.0) ? std::clamp(sy / ypy, 1e-12, 1e12) : 1.0;
    }
    const Vector d = -metric.apply(cur.gradient);
    const double slope = cur.gradient.dot(d);
    if (!(slope < 0.0)) {
      r.stop_reason = "preconditioned gradient is not a descent direction";
      break;
    }
    const double ref = *std::max_element(recent.begin(), recent.end());
    bool accepted = false;
    Evaluation trial;
    Vector xt;
    double t = alpha;
    for (int k = 0; k < opt.max_backtracks; ++k, t *= 0.5) {
      xt = r.x + t * d;
      trial = f(xt);
      ++r.evaluations;
      if (std::isfinite(trial.value) && trial.value <= ref + opt.armijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      r.stop_reason = "line search stalled";
      break;
    }
    prev_x = std::move(r.x);
    prev_g = std::move(cur.gradient);
    r.x = std::move(xt);
    cur = std::move(trial);
    gn = metric.norm(cur.gradient);
    recent.push_back(cur.value);
    if (static_cast<int>(recent.size()) > opt.window) recent.pop_front();
  }
  r.iterations = it;
  r.value = cur.value;
  r.gradient = std::move(cur.gradient);
  r.grad_norm = gn;
  r.converged = gn <= opt.grad_tol;
  if (r.converged)
    r.stop_reason = "gradient tolerance reached";
  else if (r.stop_reason.empty())
    r.stop_reason = "iteration limit";
  return r;
}

namespace {

// Respace the nodes of a polyline to equal arc length.
std::vector<Vector> respace(const std::vector<Vector>& path) {
  const std::size_t n = path.size();
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) arc[i] = arc[i - 1] + (path[i] - path[i - 1]).norm();
  const double total = arc.back();
  if (!(total > 0.0)) return path;
  std::vector<Vector> out(n);
  out.front() = path.front();
  out.back() = path.back();
  std::size_t seg = 1;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg < n - 1 && arc[seg] < target) ++seg;
    const double len = arc[seg] - arc[seg - 1];
    const double w = len > 0.0 ? (target - arc[seg - 1]) / len : 0.0;
    out[i] = (1.0 - w) * path[seg - 1] + w * path[seg];
  }
  return out;
}

}  // namespace

MountainPassResult mountain_pass(const Objective& f, const Vector& a, const Vector& b,
                                 const MountainPassOptions& opt, const Metric& metric) {
  if (opt.nodes < 3) throw InvalidArgument("mountain pass needs at least 3 path nodes");
  if (a.size() != b.size()) throw InvalidArgument("mountain pass endpoints differ in dimension");
  const int n = opt.nodes;
  std::vector<Vector> path(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    path[static_cast<std::size_t>(i)] = (1.0 - s) * a + s * b;
  }
  std::vector<Evaluation> ev(static_cast<std::size_t>(n));
  auto evaluate_all = [&] {
    for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = f(path[static_cast<std::size_t>(i)]);
  };
  evaluate_all();
  const double floor = std::max(ev.front().value, ev.back().value);

  MountainPassResult r;
  double step = 1.0;
  int it = 0;
  std::size_t k = 1;
  for (;; ++it) {
    k = 1;
    for (std::size_t i = 2; i + 1 < path.size(); ++i)
      if (ev[i].value > ev[k].value) k = i;
    r.grad_norm = metric.norm(ev[k].gradient);
    if (!(ev[k].value > floor + opt.barrier_tol)) {
      r.barrier = false;
      r.message = it == 0 ? "straight path has no interior maximum above its endpoints"
                          : "path deformed below the endpoint values; no mountain-pass barrier";
      break;
    }
    r.barrier = true;
    if (r.grad_norm <= opt.grad_tol) {
      r.converged = true;
      r.message = "peak gradient below tolerance";
      break;
    }
    if (it >= opt.max_iter) {
      r.message = "iteration limit";
      break;
    }
    const Vector d = -metric.apply(ev[k].gradient);
    const double slope = ev[k].gradient.dot(d);
    bool moved = false;
    double t = std::min(1.0, 2.0 * step);
    for (int j = 0; j < opt.max_backtracks; ++j, t *= 0.5) {
      const Vector xt = path[k] + t * d;
      Evaluation e = f(xt);
      if (std::isfinite(e.value) && e.value <= ev[k].value + 1e-4 * t * slope) {
        path[k] = xt;
        ev[k] = std::move(e);
        step = t;
        moved = true;
        break;
      }
    }
    if (!moved) {
      r.message = "peak node cannot descend further";
      break;
    }
    if (opt.reparametrize_every > 0 && (it + 1) % opt.reparametrize_every == 0) {
      path = respace(path);
      evaluate_all();
    }
  }
  r.iterations = it;
  r.peak = path[k];
  r.value = ev[k].value;
  r.gradient = ev[k].gradient;
  for (const auto& e : ev) r.profile.push_back(e.value);
  return r;
}

}  // namespace semirobin
