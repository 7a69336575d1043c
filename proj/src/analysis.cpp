#include "czgrape/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "czgrape/errors.hpp"
#include "czgrape/rng.hpp"

namespace czgrape {

namespace {

// Runs fn(i) for i in [0, n) across up to n_workers threads. Results must be
// written to preallocated per-index slots so the merge order is fixed.
void parallel_for(int n, int n_workers, const std::function<void(int)>& fn) {
  n_workers = std::max(1, std::min(n_workers, n));
  if (n_workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_workers);
  for (int w = 0; w < n_workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ControlPulse physical_waveform(const ControlPulse& raw,
                               const GaussianFilter* filter) {
  if (!filter) return raw;
  ControlPulse out = raw;
  for (int k = 0; k < 2; ++k)
    out.channel_ghz[k] =
        filter->apply(raw.channel_ghz[k], raw.buffer_value_ghz[k]);
  out.n_buffer = 0;
  return out;
}

double pulse_error(const ControlPulse& wave, const DeviceParams& params) {
  const StateSpace& space = StateSpace::two_quanta();
  HamiltonianDecomposition decomp(space, params);
  TargetGate target = TargetGate::cz(space);
  return 1.0 - fidelity(propagate(wave, decomp), target);
}

}  // namespace

SpectrumResult pulse_dft(const ControlPulse& pulse, double cutoff_ghz) {
  const int n = pulse.n_pixels();
  if (n < 2) throw ConfigError("pulse too short for a spectrum");
  const int n_bins = n / 2 + 1;

  SpectrumResult out;
  out.cutoff_ghz = cutoff_ghz;
  for (int i = 0; i < n_bins; ++i)
    out.frequency_ghz.push_back(i / (n * pulse.dt_ns));

  for (int k = 0; k < 2; ++k) {
    std::vector<complexd> bins(n_bins, 0.0);
    for (int i = 0; i < n_bins; ++i) {
      complexd acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double v = pulse.channel_ghz[k][j] - pulse.buffer_value_ghz[k];
        acc += v * std::polar(1.0, -two_pi * i * j / static_cast<double>(n));
      }
      bins[i] = acc;
    }
    // Fold the redundant upper half into the one-sided power; bins 0 and
    // (for even n) n/2 appear once in the full transform's unique set.
    std::vector<double> power(n_bins);
    for (int i = 0; i < n_bins; ++i) {
      double fold = (i == 0 || (n % 2 == 0 && i == n / 2)) ? 1.0 : 2.0;
      power[i] = fold * std::norm(bins[i]);
    }
    double total_ac = 0.0, above = 0.0;
    for (int i = 1; i < n_bins; ++i) {
      total_ac += power[i];
      if (out.frequency_ghz[i] > cutoff_ghz) above += power[i];
    }
    out.power_fraction_above_cutoff.push_back(
        total_ac > 0.0 ? above / total_ac : 0.0);

    std::vector<double> mag(n_bins);
    double peak = 0.0;
    for (int i = 0; i < n_bins; ++i) {
      mag[i] = std::abs(bins[i]);
      peak = std::max(peak, mag[i]);
    }
    if (peak > 0.0)
      for (auto& v : mag) v /= peak;
    out.magnitude.push_back(std::move(mag));
  }
  return out;
}

namespace {

// Linear resample of one channel's main window onto a new pixel count,
// matching normalized positions of pixel centers.
std::vector<double> resample_main(const std::vector<double>& src, int dst_n) {
  const int src_n = static_cast<int>(src.size());
  std::vector<double> dst(dst_n);
  if (src_n == 1) {
    std::fill(dst.begin(), dst.end(), src[0]);
    return dst;
  }
  for (int j = 0; j < dst_n; ++j) {
    double pos = (j + 0.5) / dst_n * src_n - 0.5;
    int j0 = static_cast<int>(std::floor(pos));
    double frac = pos - j0;
    int a = std::clamp(j0, 0, src_n - 1);
    int b = std::clamp(j0 + 1, 0, src_n - 1);
    dst[j] = (1.0 - frac) * src[a] + frac * src[b];
  }
  return dst;
}

}  // namespace

ScanResult qsl_scan(const std::vector<double>& gate_times_ns,
                    const OptimizationConfig& cfg, const DeviceParams& params,
                    const QslOptions& options) {
  ScanResult out;
  out.axes.push_back({"gate_time", "ns", gate_times_ns});
  out.columns = {"error", "iterations", "reached_target"};

  ControlPulse previous;
  bool have_previous = false;
  for (double t : gate_times_ns) {
    OptimizationConfig point_cfg = cfg;
    point_cfg.gate_time_ns = t;
    const ControlPulse* start = nullptr;
    ControlPulse warm;
    if (options.warm_start && have_previous) {
      warm = initial_pulse(InitialKind::constant, point_cfg, params);
      const int m = warm.n_main();
      for (int k = 0; k < 2; ++k) {
        std::vector<double> src(
            previous.channel_ghz[k].begin() + previous.n_buffer,
            previous.channel_ghz[k].end() - previous.n_buffer);
        std::vector<double> res = resample_main(src, m);
        std::copy(res.begin(), res.end(),
                  warm.channel_ghz[k].begin() + warm.n_buffer);
      }
      start = &warm;
    }
    OptimizationResult r = optimize(point_cfg, params, start);
    out.rows.push_back({t, r.final_error, static_cast<double>(r.iterations),
                        r.reason == TerminationReason::target_reached ? 1.0
                                                                      : 0.0});
    previous = r.pulse;
    have_previous = true;
  }

  double qsl = std::numeric_limits<double>::quiet_NaN();
  for (const auto& row : out.rows)
    if (row[1] <= options.machine_precision_threshold &&
        (std::isnan(qsl) || row[0] < qsl))
      qsl = row[0];
  if (!std::isnan(qsl))
    out.metadata["shortest_machine_precision_time_ns"] = std::to_string(qsl);
  out.metadata["machine_precision_threshold"] =
      std::to_string(options.machine_precision_threshold);
  out.metadata["warm_start"] = options.warm_start ? "true" : "false";
  return out;
}

ScanResult amplitude_noise_scan(const ControlPulse& raw,
                                const DeviceParams& params,
                                const GaussianFilter* filter,
                                const std::vector<double>& relative_sigmas,
                                int n_samples, std::uint64_t seed,
                                int n_workers) {
  if (n_samples < 1) throw ConfigError("noise scan needs at least one sample");
  raw.validate();

  ScanResult out;
  out.axes.push_back({"sigma_rel", "1", relative_sigmas});
  out.columns = {"mean_error", "std_error", "min_error", "max_error"};
  out.rows.resize(relative_sigmas.size());
  out.metadata["noise_model"] = "multiplicative-relative-gaussian";
  out.metadata["n_samples"] = std::to_string(n_samples);
  out.metadata["seed"] = std::to_string(seed);

  parallel_for(
      static_cast<int>(relative_sigmas.size()), n_workers, [&](int i) {
        double sigma = relative_sigmas[i];
        std::vector<double> errors(n_samples);
        for (int s = 0; s < n_samples; ++s) {
          Rng rng(seed + static_cast<std::uint64_t>(i) * n_samples + s);
          ControlPulse noisy = raw;
          for (int k = 0; k < 2; ++k)
            for (int j = 0; j < noisy.n_pixels(); ++j)
              if (!noisy.is_buffer(j))
                noisy.channel_ghz[k][j] *= 1.0 + sigma * rng.normal();
          errors[s] = pulse_error(physical_waveform(noisy, filter), params);
        }
        double mean = 0.0;
        for (double e : errors) mean += e;
        mean /= n_samples;
        double var = 0.0;
        for (double e : errors) var += (e - mean) * (e - mean);
        var = n_samples > 1 ? var / (n_samples - 1) : 0.0;
        out.rows[i] = {sigma, mean, std::sqrt(var),
                       *std::min_element(errors.begin(), errors.end()),
                       *std::max_element(errors.begin(), errors.end())};
      });
  return out;
}

ScanResult calibration_scan(const ControlPulse& raw, const DeviceParams& params,
                            const GaussianFilter* filter,
                            const std::vector<double>& offsets1_ghz,
                            const std::vector<double>& offsets2_ghz,
                            int n_workers) {
  raw.validate();
  ControlPulse wave = physical_waveform(raw, filter);
  const StateSpace& space = StateSpace::two_quanta();
  const int idx10 = space.computational_indices()[2];  // (1,0,0)

  ScanResult out;
  out.axes.push_back({"offset1", "GHz", offsets1_ghz});
  out.axes.push_back({"offset2", "GHz", offsets2_ghz});
  out.columns = {"fidelity", "u1010_sq"};
  const int n1 = static_cast<int>(offsets1_ghz.size());
  const int n2 = static_cast<int>(offsets2_ghz.size());
  out.rows.resize(static_cast<size_t>(n1) * n2);

  HamiltonianDecomposition decomp(space, params);
  TargetGate target = TargetGate::cz(space);

  parallel_for(n1 * n2, n_workers, [&](int idx) {
    int i = idx / n2, j = idx % n2;
    ControlPulse shifted = wave;
    for (int p = 0; p < shifted.n_pixels(); ++p) {
      shifted.channel_ghz[0][p] += offsets1_ghz[i];
      shifted.channel_ghz[1][p] += offsets2_ghz[j];
    }
    shifted.buffer_value_ghz[0] += offsets1_ghz[i];
    shifted.buffer_value_ghz[1] += offsets2_ghz[j];
    Matrix u = propagate(shifted, decomp);
    out.rows[idx] = {offsets1_ghz[i], offsets2_ghz[j], fidelity(u, target),
                     std::norm(u(idx10, idx10))};
  });
  return out;
}

ScanResult timing_scan(const ControlPulse& raw, const DeviceParams& params,
                       const GaussianFilter* filter,
                       const std::vector<double>& delays_ns, int n_workers) {
  raw.validate();
  ControlPulse wave = physical_waveform(raw, filter);
  for (double d : delays_ns)
    if (std::abs(d) > wave.total_duration_ns())
      throw ConfigError("timing scan delay exceeds the pulse duration");

  ScanResult out;
  out.axes.push_back({"delay", "ns", delays_ns});
  out.columns = {"fidelity"};
  out.rows.resize(delays_ns.size());
  out.metadata["shift_interpolation"] = "linear-fractional-pixel";

  parallel_for(static_cast<int>(delays_ns.size()), n_workers, [&](int i) {
    double shift = delays_ns[i] / wave.dt_ns;  // in pixels; +: ch2 lags
    ControlPulse shifted = wave;
    shifted.n_buffer = 0;  // the shifted channel is a free-form waveform
    const auto& src = wave.channel_ghz[1];
    const int n = wave.n_pixels();
    double park = wave.buffer_value_ghz[1];
    for (int j = 0; j < n; ++j) {
      double pos = j - shift;
      double j0 = std::floor(pos);
      double frac = pos - j0;
      int a = static_cast<int>(j0), b = a + 1;
      double va = (a < 0 || a >= n) ? park : src[a];
      double vb = (b < 0 || b >= n) ? park : src[b];
      shifted.channel_ghz[1][j] = (1.0 - frac) * va + frac * vb;
    }
    out.rows[i] = {delays_ns[i], 1.0 - pulse_error(shifted, params)};
  });
  return out;
}

ScanResult parameter_error_scan(const ControlPulse& raw,
                                const DeviceParams& params,
                                const GaussianFilter* filter,
                                const std::vector<double>& rel_errors_g1,
                                const std::vector<double>& rel_errors_delta1,
                                int n_workers) {
  raw.validate();
  ControlPulse wave = physical_waveform(raw, filter);

  ScanResult out;
  out.axes.push_back({"rel_g1", "1", rel_errors_g1});
  out.axes.push_back({"rel_delta1", "1", rel_errors_delta1});
  out.columns = {"fidelity"};
  const int n1 = static_cast<int>(rel_errors_g1.size());
  const int n2 = static_cast<int>(rel_errors_delta1.size());
  out.rows.resize(static_cast<size_t>(n1) * n2);

  parallel_for(n1 * n2, n_workers, [&](int idx) {
    int i = idx / n2, j = idx % n2;
    DeviceParams perturbed = params;
    perturbed.qubit[0].g_ghz *= 1.0 + rel_errors_g1[i];
    perturbed.qubit[0].anharm =
        params.qubit[0].anharm.scaled(1.0 + rel_errors_delta1[j]);
    out.rows[idx] = {rel_errors_g1[i], rel_errors_delta1[j],
                     1.0 - pulse_error(wave, perturbed)};
  });
  return out;
}

}  // namespace czgrape
