#include "sdr/photocurrent.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sdr {

void TransientModel::validate() const {
    if (!(tau_singlet_relax > 0.0) || !(tau_triplet_relax > 0.0))
        throw std::invalid_argument("transient_model: relaxation times must be > 0");
}

void DetectorModel::validate() const {
    if (rise_time < 0.0) throw std::invalid_argument("detector: rise_time must be >= 0");
    if (sample_jitter < 0.0) throw std::invalid_argument("detector: sample_jitter must be >= 0");
}

void CurrentTrace::validate() const {
    if (times.size() != current.size())
        throw std::invalid_argument("trace: times/current length mismatch");
    if (times.size() < 2) throw std::invalid_argument("trace: need at least two samples");
    for (size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw std::invalid_argument("trace: times must be increasing");
}

CurrentTrace transient_from_state(double delta_pop_singlet, double delta_pop_triplet,
                                  const TransientModel& m, double horizon, double dt) {
    m.validate();
    if (!(horizon > 0.0)) throw std::invalid_argument("transient_from_state: horizon must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("transient_from_state: dt must be > 0");

    CurrentTrace trace;
    const int n = static_cast<int>(std::ceil(horizon / dt)) + 1;
    trace.times.reserve(n);
    trace.current.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = std::min(horizon, k * dt);
        trace.times.push_back(t);
        trace.current.push_back(m.baseline +
                                m.coeff_singlet * delta_pop_singlet *
                                    std::exp(-t / m.tau_singlet_relax) +
                                m.coeff_triplet * delta_pop_triplet *
                                    std::exp(-t / m.tau_triplet_relax));
    }
    return trace;
}

CurrentTrace apply_detector(const CurrentTrace& trace, const DetectorModel& d) {
    trace.validate();
    d.validate();
    if (d.rise_time == 0.0) return trace;

    CurrentTrace out;
    out.times = trace.times;
    out.current.resize(trace.current.size());
    out.current[0] = 0.0;
    for (size_t k = 0; k + 1 < trace.times.size(); ++k) {
        const double h = trace.times[k + 1] - trace.times[k];
        const double a = h / d.rise_time;
        const double ea = std::exp(-a);
        // y' = (u - y)/tau with u linear on the step: exact update
        const double u0 = trace.current[k];
        const double u1 = trace.current[k + 1];
        const double w = (a > 1e-8) ? (1.0 - ea) / a : 1.0 - a / 2.0 + a * a / 6.0;
        out.current[k + 1] = ea * out.current[k] + u0 * (1.0 - ea) + (u1 - u0) * (1.0 - w);
    }
    return out;
}

double sample_at(const CurrentTrace& trace, double t) {
    trace.validate();
    if (t < trace.times.front() || t > trace.times.back())
        throw std::out_of_range("sample_at: t = " + std::to_string(t) +
                                " outside trace span");
    const auto it = std::lower_bound(trace.times.begin(), trace.times.end(), t);
    const size_t hi = std::min<size_t>(std::max<std::ptrdiff_t>(1, it - trace.times.begin()),
                                       trace.times.size() - 1);
    const size_t lo = hi - 1;
    const double f = (t - trace.times[lo]) / (trace.times[hi] - trace.times[lo]);
    return trace.current[lo] + f * (trace.current[hi] - trace.current[lo]);
}

double sample_with_jitter(const CurrentTrace& trace, double t, const DetectorModel& d,
                          SplitMix64& rng) {
    d.validate();
    if (d.sample_jitter == 0.0) return sample_at(trace, t);
    const double offset = (2.0 * rng.uniform01() - 1.0) * d.sample_jitter;
    double ts = t + offset;
    ts = std::max(trace.times.front(), std::min(trace.times.back(), ts));
    return sample_at(trace, ts);
}

TraceExtremum trace_extremum(const CurrentTrace& trace, double baseline) {
    trace.validate();
    TraceExtremum ext{trace.times.front(), trace.current.front()};
    double best = std::abs(trace.current.front() - baseline);
    for (size_t k = 1; k < trace.times.size(); ++k) {
        const double dev = std::abs(trace.current[k] - baseline);
        if (dev > best) {
            best = dev;
            ext.time = trace.times[k];
            ext.value = trace.current[k];
        }
    }
    return ext;
}

void write_trace_csv(const CurrentTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "time_us,current_pA\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    for (size_t k = 0; k < trace.times.size(); ++k) {
        emit(trace.times[k] * 1e6);
        out << ",";
        emit(trace.current[k] * 1e12);
        out << "\n";
    }
}

}  // namespace sdr
