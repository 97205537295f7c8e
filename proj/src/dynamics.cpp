#include "sqz/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <Eigen/LU>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "sqz/errors.hpp"
#include "sqz/parallel.hpp"

namespace sqz {

void PulseSchedule::validate(std::size_t n_channels) const {
  if (!(horizon > start)) throw DomainError("schedule horizon must be later than its start");
  if (channels.size() != n_channels)
    throw DimensionError("schedule has " + std::to_string(channels.size()) + " channel entries for " +
                         std::to_string(n_channels) + " channels");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    auto iv = channels[c];
    std::sort(iv.begin(), iv.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t k = 0; k < iv.size(); ++k) {
      if (!(iv[k].end > iv[k].start))
        throw DomainError("empty or reversed pulse interval on channel " + std::to_string(c));
      if (!(iv[k].power >= 0.0)) throw DomainError("negative pulse power on channel " + std::to_string(c));
      if (k > 0 && iv[k].start < iv[k - 1].end)
        throw DomainError("overlapping pulse intervals on channel " + std::to_string(c));
    }
  }
}

double PulseSchedule::power_at(std::size_t channel, double t, double cw_power) const {
  const auto& iv = channels.at(channel);
  if (iv.empty()) return cw_power;
  for (const auto& p : iv)
    if (t >= p.start && t < p.end) return p.power;
  return 0.0;
}

std::vector<double> PulseSchedule::transitions() const {
  std::vector<double> out;
  for (const auto& iv : channels)
    for (const auto& p : iv)
      for (double t : {p.start, p.end})
        if (t > start && t < horizon) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double PulseSchedule::shortest_segment() const {
  std::vector<double> edges = transitions();
  edges.insert(edges.begin(), start);
  edges.push_back(horizon);
  double best = horizon - start;
  for (std::size_t i = 1; i < edges.size(); ++i) best = std::min(best, edges[i] - edges[i - 1]);
  return best;
}

PulseSchedule PulseSchedule::from_envelopes(const std::vector<ChannelSpec>& channels, double start,
                                            double horizon) {
  PulseSchedule s;
  s.start = start;
  s.horizon = horizon;
  for (const auto& ch : channels) {
    std::vector<PowerInterval> iv;
    if (!ch.envelope.empty()) {
      // Before the first step the envelope holds full power.
      double t = start;
      double scale = ch.scale_at(start);
      for (const auto& step : ch.envelope) {
        if (step.time <= start) continue;
        if (step.time >= horizon) break;
        if (scale > 0.0) iv.push_back({t, step.time, scale * ch.power});
        t = step.time;
        scale = step.scale;
      }
      if (scale > 0.0) iv.push_back({t, horizon, scale * ch.power});
      if (iv.empty()) iv.push_back({horizon, horizon + 1.0, 0.0});
    }
    s.channels.push_back(std::move(iv));
  }
  return s;
}

namespace {

// Ground-manifold elements of vec(rho): populations and Zeeman coherences of
// |x>, |y> plus the trap population. Everything else decays at optical or
// hyperfine rates in the undriven dark region.
std::vector<int> slow_indices(const LevelScheme& scheme) {
  const int d = scheme.dim();
  std::vector<int> out;
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) out.push_back(m + d * n);
  if (scheme.kind == SchemeKind::FiveLevel) out.push_back(level::trap + d * level::trap);
  return out;
}

struct Reduced {
  CMatrix drift;  // ground-manifold generator
  CMatrix lift;   // fast = lift * slow
};

Reduced reduce(const CMatrix& g, const std::vector<int>& slow, const std::vector<int>& fast) {
  auto pick = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    CMatrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = g(rows[r], cols[c]);
    return out;
  };
  const CMatrix gss = pick(slow, slow), gsf = pick(slow, fast);
  const CMatrix gfs = pick(fast, slow), gff = pick(fast, fast);
  Reduced r;
  r.lift = -gff.partialPivLu().solve(gfs);
  r.drift = gss + gsf * r.lift;
  return r;
}

CVector rk4(const CMatrix& a, CVector x, double span, long steps) {
  const double h = span / static_cast<double>(steps);
  for (long s = 0; s < steps; ++s) {
    const CVector k1 = a * x;
    const CVector k2 = a * (x + 0.5 * h * k1);
    const CVector k3 = a * (x + 0.5 * h * k2);
    const CVector k4 = a * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

class DarkIntegrator {
 public:
  DarkIntegrator(const ArrayContext& ctx, const PulseSchedule& sched, const EvolveOptions& opts)
      : ctx_(ctx), sched_(sched), opts_(opts), slow_(slow_indices(ctx.scheme)) {
    const int block = ctx.dim() * ctx.dim();
    std::vector<bool> is_slow(block, false);
    for (int i : slow_) is_slow[i] = true;
    for (int i = 0; i < block; ++i)
      if (!is_slow[i]) fast_.push_back(i);
  }

  void set_state(const CMatrix& dark) {
    const CVector v = vec(dark);
    x_.resize(slow_.size());
    for (std::size_t i = 0; i < slow_.size(); ++i) x_(i) = v(slow_[i]);
  }

  void refresh(double t) {
    powers_.resize(ctx_.channels.size());
    specs_ = ctx_.channels;
    for (std::size_t c = 0; c < specs_.size(); ++c) {
      powers_[c] = sched_.power_at(c, t, ctx_.channels[c].power);
      specs_[c].power = powers_[c];
    }
    const CMatrix dark = full_dark();
    int distinct = 0;
    const auto of = group_channels(specs_, {}, distinct);
    std::vector<CMatrix> profile_maps(distinct);
    std::vector<bool> done(distinct, false);
    for (std::size_t c = 0; c < specs_.size(); ++c) {
      if (done[of[c]]) continue;
      profile_maps[of[c]] = channel_response(ctx_, specs_[c], 1.0, dark, false).mean_map;
      done[of[c]] = true;
    }
    maps_.resize(specs_.size());
    for (std::size_t c = 0; c < specs_.size(); ++c) maps_[c] = profile_maps[of[c]];
    reduced_ = reduce(effective_dark_generator(ctx_, maps_), slow_, fast_);
    ++refreshes;
  }

  void advance(double span) {
    const double rate = std::max(1.0, reduced_.drift.cwiseAbs().rowwise().sum().maxCoeff());
    long steps = std::max<long>(1, static_cast<long>(std::ceil(span / opts_.dt - 1e-9)));
    const cplx trace0 = slow_trace(x_);
    for (int h = 0;; ++h) {
      const CVector coarse = rk4(reduced_.drift, x_, span, steps);
      const CVector fine = rk4(reduced_.drift, x_, span, 2 * steps);
      const double diff = (coarse - fine).cwiseAbs().maxCoeff();
      const double drift = std::abs(slow_trace(fine) - trace0);
      if (diff <= opts_.step_tolerance && drift <= opts_.trace_tolerance && fine.allFinite()) {
        x_ = fine;
        halvings = std::max(halvings, h);
        return;
      }
      if (h >= opts_.max_halvings) {
        std::ostringstream os;
        os << "reduced dark-state integration failed to converge after " << h
           << " step halvings (step " << span / (2.0 * steps) << " s, fastest rate " << rate
           << " s^-1, step mismatch " << diff << ", trace drift " << drift << ")";
        throw IntegrationError(os.str());
      }
      steps *= 2;
    }
  }

  CMatrix full_dark() const {
    const int d = ctx_.dim();
    CVector v = CVector::Zero(d * d);
    for (std::size_t i = 0; i < slow_.size(); ++i) v(slow_[i]) = x_(i);
    if (reduced_.lift.size() > 0) {
      const CVector f = reduced_.lift * x_;
      for (std::size_t i = 0; i < fast_.size(); ++i) v(fast_[i]) = f(i);
    }
    CMatrix rho = unvec(v, d);
    rho = 0.5 * (rho + rho.adjoint());
    return rho / rho.trace().real();
  }

  Snapshot snapshot(double t) const {
    Snapshot s;
    s.time = t;
    s.powers = powers_;
    s.dark = full_dark();
    const CVector dv = vec(s.dark);
    for (const auto& m : maps_) {
      CMatrix rho = unvec(m * dv, ctx_.dim());
      s.channels.push_back(0.5 * (rho + rho.adjoint()));
    }
    return s;
  }

  int refreshes = 0;
  int halvings = 0;

 private:
  cplx slow_trace(const CVector& x) const {
    const int d = ctx_.dim();
    cplx tr = 0.0;
    for (std::size_t i = 0; i < slow_.size(); ++i)
      if (slow_[i] % (d + 1) == 0) tr += x(i);
    return tr;
  }

  const ArrayContext& ctx_;
  const PulseSchedule& sched_;
  const EvolveOptions& opts_;
  std::vector<int> slow_, fast_;
  CVector x_;
  Reduced reduced_;
  std::vector<double> powers_;
  std::vector<ChannelSpec> specs_;
  std::vector<CMatrix> maps_;
};

enum EventKind : unsigned { kSnapshot = 1u, kRefresh = 2u, kTransition = 4u };

}  // namespace

Trajectory time_evolve(const ArrayModel& model, const PulseSchedule& schedule, const EvolveOptions& opts) {
  model.validate();
  schedule.validate(model.channels.size());
  if (!(opts.dt > 0.0) || !(opts.snapshot_interval > 0.0) || !(opts.refresh_interval > 0.0))
    throw DomainError("dt, snapshot_interval and refresh_interval must be positive");
  const double span = schedule.horizon - schedule.start;
  if (span / opts.snapshot_interval > 1.0e6 || span / opts.refresh_interval > 1.0e6)
    throw ResourceError("more than 10^6 snapshots or refreshes requested");

  // Initial condition: steady state of the powers in force at the start.
  ArrayModel initial = model;
  for (std::size_t c = 0; c < initial.channels.size(); ++c) {
    initial.channels[c].power = schedule.power_at(c, schedule.start, model.channels[c].power);
    initial.channels[c].envelope.clear();
  }
  const ArraySolution sol = solve_array(initial);

  Trajectory traj;
  traj.context = make_context(model);
  traj.schedule = schedule;
  const bool depends_on_dark = traj.context.numerics.pump_depletion && traj.context.kappa > 0.0;

  // Event times keyed on a fine integer grid so coincident events merge exactly.
  const double quantum = 1.0e-12;
  std::map<long long, unsigned> events;
  auto key = [&](double t) { return std::llround((t - schedule.start) / quantum); };
  auto add = [&](double t, unsigned kind) { events[key(t)] |= kind; };
  const long n_snap = static_cast<long>(std::floor(span / opts.snapshot_interval + 1e-9));
  for (long k = 1; k <= n_snap; ++k) add(schedule.start + k * opts.snapshot_interval, kSnapshot);
  if (depends_on_dark) {
    const long n_ref = static_cast<long>(std::floor(span / opts.refresh_interval + 1e-9));
    for (long k = 1; k <= n_ref; ++k) add(schedule.start + k * opts.refresh_interval, kRefresh);
  }
  for (double t : schedule.transitions()) add(t, kTransition);
  add(schedule.horizon, kSnapshot);
  events.erase(events.upper_bound(key(schedule.horizon)), events.end());

  DarkIntegrator integ(traj.context, schedule, opts);
  integ.set_state(sol.dark);
  integ.refresh(schedule.start);
  traj.snapshots.push_back(integ.snapshot(schedule.start));

  double t = schedule.start;
  for (const auto& [k, kind] : events) {
    const double next = schedule.start + static_cast<double>(k) * quantum;
    if (next > t) integ.advance(next - t);
    t = next;
    if (kind & (kRefresh | kTransition)) integ.refresh(t);
    if (kind & kSnapshot) traj.snapshots.push_back(integ.snapshot(t));
  }
  traj.refreshes = integ.refreshes;
  traj.halvings = integ.halvings;
  return traj;
}

std::vector<std::vector<double>> instantaneous_squeezing(const Trajectory& traj, double omega_detect,
                                                         const std::vector<int>& channels, int threads) {
  const double shortest = traj.schedule.shortest_segment();
  if (!(omega_detect >= 10.0 / shortest)) {
    std::ostringstream os;
    os << "detection frequency " << omega_detect / kTwoPi << " Hz is too low for a quasi-static readout: "
       << "the fastest schedule segment lasts " << shortest << " s, so omega must be at least "
       << 10.0 / shortest << " rad/s";
    throw DomainError(os.str());
  }
  const auto& ctx = traj.context;
  for (int c : channels)
    if (c < 0 || c >= static_cast<int>(ctx.channels.size()))
      throw DimensionError("monitored channel " + std::to_string(c) + " out of range");

  std::vector<std::vector<double>> out(traj.snapshots.size(), std::vector<double>(channels.size(), 0.0));
  const std::vector<double> omegas{omega_detect};
  parallel_for(traj.snapshots.size(), threads, [&](std::size_t i) {
    const Snapshot& snap = traj.snapshots[i];
    for (std::size_t k = 0; k < channels.size(); ++k) {
      ChannelSpec ch = ctx.channels[channels[k]];
      ch.power = snap.powers[channels[k]];
      if (ch.power == 0.0) continue;  // no pump, no local oscillator: shot noise
      const auto response = channel_response(ctx, ch, 1.0, snap.dark, true);
      out[i][k] = channel_spectrum(ctx, ch, response, snap.dark, omegas).points[0].s_min_db;
    }
  });
  return out;
}

namespace {

struct ExpDecay : Eigen::DenseFunctor<double> {
  // Parameters (A, B, tau / tau0) with s = (t - t_off) / tau0.
  ExpDecay(std::vector<double> s, std::vector<double> y)
      : Eigen::DenseFunctor<double>(3, static_cast<int>(s.size())), s_(std::move(s)), y_(std::move(y)) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (std::size_t i = 0; i < s_.size(); ++i) r(i) = p(0) + p(1) * std::exp(-s_[i] / p(2)) - y_[i];
    return 0;
  }
  int df(const InputType& p, JacobianType& j) const {
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double e = std::exp(-s_[i] / p(2));
      j(i, 0) = 1.0;
      j(i, 1) = e;
      j(i, 2) = p(1) * e * s_[i] / (p(2) * p(2));
    }
    return 0;
  }

  std::vector<double> s_, y_;
};

}  // namespace

RecoveryFit recovery_time(const std::vector<double>& times, const std::vector<double>& values, double t_off) {
  if (times.size() != values.size()) throw DimensionError("times and values differ in length");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] > t_off) {
      t.push_back(times[i]);
      y.push_back(values[i]);
    }
  if (t.size() < 4) throw FitError("need at least 4 samples after t_off to fit a recovery");

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double spread = *hi - *lo;
  if (!(spread > 1e-9 * std::max(1.0, std::abs(*hi))))
    throw FitError("undefined recovery: signal is flat after t_off");

  // Starting guess: settle at the last sample; tau where the excursion falls by 1/e.
  const double a0 = y.back();
  const double b0 = y.front() - a0;
  double tau0 = (t.back() - t_off) / 3.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(y[i] - a0) <= std::abs(b0) / std::exp(1.0)) {
      tau0 = std::max(t[i] - t_off, 1e-3 * (t.back() - t_off));
      break;
    }
  // Rescale B for the sample at t_off rather than the first sample after it.
  const double b_start = b0 * std::exp((t.front() - t_off) / tau0);

  std::vector<double> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = (t[i] - t_off) / tau0;
  ExpDecay f(s, y);
  Eigen::LevenbergMarquardt<ExpDecay> lm(f);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setMaxfev(4000);
  Eigen::VectorXd p(3);
  p << a0, b_start, 1.0;
  const auto status = lm.minimize(p);
  using namespace Eigen::LevenbergMarquardtSpace;
  if (status == ImproperInputParameters || status == TooManyFunctionEvaluation || !p.allFinite() ||
      !(p(2) > 0.0))
    throw FitError("recovery fit did not converge (status " + std::to_string(static_cast<int>(status)) + ")");
  if (!(std::abs(p(1)) > 1e-9 * std::max(1.0, std::abs(p(0)))))
    throw FitError("undefined recovery: fitted amplitude vanishes");

  Eigen::VectorXd r(s.size());
  f(p, r);
  Eigen::MatrixXd j(s.size(), 3);
  f.df(p, j);
  const double ssr = r.squaredNorm();
  const double dof = static_cast<double>(s.size()) - 3.0;
  const Eigen::Matrix3d cov = (ssr / dof) * (j.transpose() * j).inverse();

  RecoveryFit fit;
  fit.offset = p(0);
  fit.amplitude = p(1);
  fit.tau = p(2) * tau0;
  fit.tau_sigma = std::sqrt(std::max(0.0, cov(2, 2))) * tau0;
  fit.rms_residual = std::sqrt(ssr / static_cast<double>(s.size()));
  return fit;
}

}  // namespace sqz
