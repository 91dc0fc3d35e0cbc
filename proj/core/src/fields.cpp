#include "fd/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fd {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

void require_time(double t, const char* what) {
    if (!(t > 0.0) || t > 1.0) {
        throw std::invalid_argument(std::string(what) + ": t must be in (0, 1], got " +
                                    std::to_string(t));
    }
}

}  // namespace

DataDistribution DataDistribution::delta(VideoTensor center) {
    require_valid_shape(center.shape(), "DataDistribution::delta");
    DataDistribution d;
    d.kind_ = Kind::delta;
    d.components_.push_back({1.0, std::move(center), 0.0});
    return d;
}

DataDistribution DataDistribution::isotropic_gaussian(VideoTensor center, double sigma) {
    require_valid_shape(center.shape(), "DataDistribution::isotropic_gaussian");
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("DataDistribution: sigma must be > 0");
    }
    DataDistribution d;
    d.kind_ = Kind::gaussian;
    d.components_.push_back({1.0, std::move(center), sigma});
    return d;
}

DataDistribution DataDistribution::mixture(std::vector<GaussianComponent> components) {
    if (components.empty()) {
        throw std::invalid_argument("DataDistribution: mixture needs at least one component");
    }
    double sum = 0.0;
    for (const auto& comp : components) {
        require_valid_shape(comp.center.shape(), "DataDistribution::mixture");
        if (comp.center.shape() != components.front().center.shape()) {
            throw std::invalid_argument("DataDistribution: mixture centers must share one shape");
        }
        if (!(comp.weight > 0.0)) {
            throw std::invalid_argument("DataDistribution: mixture weights must be > 0");
        }
        if (!(comp.sigma > 0.0)) {
            throw std::invalid_argument("DataDistribution: mixture sigmas must be > 0");
        }
        sum += comp.weight;
    }
    if (std::fabs(sum - 1.0) > kWeightSumTolerance) {
        throw std::invalid_argument("DataDistribution: mixture weights sum to " +
                                    std::to_string(sum) + ", expected 1");
    }
    DataDistribution d;
    d.kind_ = Kind::mixture;
    d.components_ = std::move(components);
    return d;
}

const TensorShape& DataDistribution::shape() const { return components_.front().center.shape(); }

const VideoTensor& DataDistribution::center() const {
    if (kind_ == Kind::mixture) {
        throw std::invalid_argument("DataDistribution: center() is not defined for mixtures");
    }
    return components_.front().center;
}

double DataDistribution::sigma() const {
    if (kind_ != Kind::gaussian) {
        throw std::invalid_argument("DataDistribution: sigma() only defined for gaussians");
    }
    return components_.front().sigma;
}

VideoTensor DataDistribution::sample(NoiseStream& stream) const {
    const GaussianComponent* comp = &components_.front();
    if (kind_ == Kind::mixture) {
        double u = stream.next_uniform();
        double acc = 0.0;
        for (const auto& c : components_) {
            acc += c.weight;
            if (u <= acc) {
                comp = &c;
                break;
            }
            comp = &c;  // numeric slack: final component absorbs the tail
        }
    }
    if (kind_ == Kind::delta) return comp->center;
    VideoTensor out = comp->center;
    for (double& v : out.data()) v += comp->sigma * stream.next_normal();
    return out;
}

VideoTensor delta_velocity(const VideoTensor& x, double t, const VideoTensor& mu) {
    require_time(t, "delta_velocity");
    require_same_shape(x, mu, "delta_velocity");
    VideoTensor out(x.shape());
    double inv_t = 1.0 / t;
    for (size_t i = 0; i < x.size(); ++i) {
        out.data()[i] = (x.data()[i] - mu.data()[i]) * inv_t;
    }
    return out;
}

VideoTensor gaussian_velocity(const VideoTensor& x, double t, const VideoTensor& center,
                              double sigma) {
    require_time(t, "gaussian_velocity");
    require_same_shape(x, center, "gaussian_velocity");
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_velocity: sigma must be > 0");
    }
    double omt = 1.0 - t;
    double var = sigma * sigma;
    double s2 = omt * omt * var + t * t;
    double coeff = (t - omt * var) / s2;
    VideoTensor out(x.shape());
    for (size_t i = 0; i < x.size(); ++i) {
        double c = center.data()[i];
        out.data()[i] = coeff * (x.data()[i] - omt * c) - c;
    }
    return out;
}

VideoTensor mixture_velocity(const VideoTensor& x, double t, const DataDistribution& mix) {
    require_time(t, "mixture_velocity");
    if (mix.kind() != DataDistribution::Kind::mixture) {
        throw std::invalid_argument("mixture_velocity: distribution is not a mixture");
    }
    if (x.shape() != mix.shape()) {
        throw std::invalid_argument("mixture_velocity: state shape " + x.shape().str() +
                                    " does not match mixture shape " + mix.shape().str());
    }
    const auto& comps = mix.components();
    size_t k = comps.size();
    size_t d = x.size();
    double omt = 1.0 - t;

    // Log posterior weight of each component given x_t, up to one shared
    // constant: log pi_k - (d/2) log s_k^2 - ||x - (1-t) c_k||^2 / (2 s_k^2).
    std::vector<double> logw(k);
    for (size_t j = 0; j < k; ++j) {
        double var = comps[j].sigma * comps[j].sigma;
        double s2 = omt * omt * var + t * t;
        double q = 0.0;
        for (size_t i = 0; i < d; ++i) {
            double r = x.data()[i] - omt * comps[j].center.data()[i];
            q += r * r;
        }
        logw[j] = std::log(comps[j].weight) - 0.5 * double(d) * std::log(s2) - 0.5 * q / s2;
    }
    double peak = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(peak)) {
        throw std::runtime_error("mixture_velocity: degenerate posterior (all weights underflow)");
    }
    double total = 0.0;
    for (size_t j = 0; j < k; ++j) {
        logw[j] = std::exp(logw[j] - peak);
        total += logw[j];
    }

    VideoTensor out(x.shape());
    for (size_t j = 0; j < k; ++j) {
        double wj = logw[j] / total;
        if (wj == 0.0) continue;
        VideoTensor vj = gaussian_velocity(x, t, comps[j].center, comps[j].sigma);
        for (size_t i = 0; i < d; ++i) out.data()[i] += wj * vj.data()[i];
    }
    return out;
}

VideoTensor cfg_combine(const VideoTensor& v_uncond, const VideoTensor& v_cond, double scale) {
    require_same_shape(v_uncond, v_cond, "cfg_combine");
    if (scale == 1.0) return v_cond;
    if (scale == 0.0) return v_uncond;
    VideoTensor out(v_uncond.shape());
    for (size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = v_uncond.data()[i] + scale * (v_cond.data()[i] - v_uncond.data()[i]);
    }
    return out;
}

void ConditionRegistry::add(const std::string& id, DataDistribution dist) {
    if (id.empty()) throw std::invalid_argument("ConditionRegistry: empty id");
    entries_.insert_or_assign(id, std::move(dist));
}

bool ConditionRegistry::has(const std::string& id) const { return entries_.count(id) > 0; }

const DataDistribution& ConditionRegistry::get(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) {
        throw std::invalid_argument("ConditionRegistry: unknown condition id \"" + id + "\"");
    }
    return it->second;
}

std::vector<std::string> ConditionRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [id, dist] : entries_) out.push_back(id);
    return out;
}

VideoTensor RegistryField::evaluate(const VideoTensor& x, double t, const Condition& c) const {
    const DataDistribution& dist = registry_.get(c.id);
    switch (dist.kind()) {
        case DataDistribution::Kind::delta:
            return delta_velocity(x, t, dist.center());
        case DataDistribution::Kind::gaussian:
            return gaussian_velocity(x, t, dist.center(), dist.sigma());
        case DataDistribution::Kind::mixture:
            return mixture_velocity(x, t, dist);
    }
    throw std::runtime_error("RegistryField: unreachable distribution kind");
}

double fm_loss(const VelocityField& field, const DataDistribution& dist,
               const Condition& condition, uint64_t n_samples, const SeedSpec& seed) {
    if (n_samples == 0) throw std::invalid_argument("fm_loss: n_samples must be >= 1");
    NoiseStream stream(seed);
    TensorShape shape = dist.shape();
    double acc = 0.0;
    for (uint64_t s = 0; s < n_samples; ++s) {
        double t = 1.0 - stream.next_uniform();  // uniform in (0, 1]... see below
        // next_uniform is in (0, 1) exclusive, so t is in (0, 1) here; the
        // endpoint t = 1 has measure zero and the field contract only needs
        // t > 0.
        VideoTensor x_data = dist.sample(stream);
        VideoTensor x_t(shape);
        VideoTensor target(shape);
        for (size_t i = 0; i < x_t.size(); ++i) {
            double eps = stream.next_normal();
            x_t.data()[i] = (1.0 - t) * x_data.data()[i] + t * eps;
            target.data()[i] = eps - x_data.data()[i];
        }
        VideoTensor v = field.evaluate(x_t, t, condition);
        double err = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            double r = v.data()[i] - target.data()[i];
            err += r * r;
        }
        acc += err;
    }
    return acc / double(n_samples);
}

}  // namespace fd
