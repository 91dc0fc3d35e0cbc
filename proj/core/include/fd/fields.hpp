#ifndef FD_FIELDS_HPP
#define FD_FIELDS_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fd/condition.hpp"
#include "fd/noise.hpp"
#include "fd/tensor.hpp"

namespace fd {

// Noising convention used throughout: states interpolate as
//   x_t = (1 - t) * x_data + t * eps,  eps ~ N(0, I),
// so t = 1 is pure noise and t = 0 is data. The marginal velocity is
//   v(x, t) = E[eps - x_data | x_t = x],
// and integration runs t from 1 down to 0.

struct GaussianComponent {
    double weight = 0.0;
    VideoTensor center;
    double sigma = 0.0;
};

// Data distribution with a closed-form marginal velocity: a point mass, an
// isotropic Gaussian, or a finite mixture of isotropic Gaussians.
class DataDistribution {
public:
    enum class Kind { delta, gaussian, mixture };

    static DataDistribution delta(VideoTensor center);
    static DataDistribution isotropic_gaussian(VideoTensor center, double sigma);
    // Weights must be positive and sum to 1 (within 1e-9); all centers must
    // share one shape and all sigmas must be positive.
    static DataDistribution mixture(std::vector<GaussianComponent> components);

    Kind kind() const { return kind_; }
    const TensorShape& shape() const;
    // delta / gaussian accessors.
    const VideoTensor& center() const;
    double sigma() const;
    const std::vector<GaussianComponent>& components() const { return components_; }

    // Draws one sample of x_data from this distribution.
    VideoTensor sample(NoiseStream& stream) const;

private:
    Kind kind_ = Kind::delta;
    std::vector<GaussianComponent> components_;  // single entry unless mixture
};

// Marginal velocity of a point mass at mu: (x - mu) / t. t must be in (0, 1].
VideoTensor delta_velocity(const VideoTensor& x, double t, const VideoTensor& mu);

// Marginal velocity of N(center, sigma^2 I). With m = (1-t)*center and
// s^2 = (1-t)^2 sigma^2 + t^2:
//   v(x, t) = ((t - (1-t) sigma^2) / s^2) * (x - m) - center.
VideoTensor gaussian_velocity(const VideoTensor& x, double t,
                              const VideoTensor& center, double sigma);

// Posterior-weighted combination of the component velocities. Weights are
// w_k proportional to pi_k * N(x; (1-t) c_k, s_k^2 I), evaluated in log space
// with log-sum-exp so moderate underflow is harmless. If every component's
// log weight is non-finite the posterior is degenerate and a
// std::runtime_error is thrown.
VideoTensor mixture_velocity(const VideoTensor& x, double t, const DataDistribution& mix);

// v_uncond + scale * (v_cond - v_uncond). scale 1 returns v_cond exactly and
// scale 0 returns v_uncond exactly.
VideoTensor cfg_combine(const VideoTensor& v_uncond, const VideoTensor& v_cond, double scale);

// Velocity evaluator: maps (state, time, condition) to a velocity tensor.
class VelocityField {
public:
    virtual ~VelocityField() = default;
    virtual VideoTensor evaluate(const VideoTensor& x, double t, const Condition& c) const = 0;
};

// Maps condition ids to data distributions.
class ConditionRegistry {
public:
    void add(const std::string& id, DataDistribution dist);
    bool has(const std::string& id) const;
    // Throws std::invalid_argument for unknown ids.
    const DataDistribution& get(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, DataDistribution> entries_;
};

// Analytic field: dispatches evaluation to the closed-form velocity of the
// condition's registered distribution.
class RegistryField : public VelocityField {
public:
    explicit RegistryField(ConditionRegistry registry) : registry_(std::move(registry)) {}
    VideoTensor evaluate(const VideoTensor& x, double t, const Condition& c) const override;
    const ConditionRegistry& registry() const { return registry_; }

private:
    ConditionRegistry registry_;
};

// Monte-Carlo flow-matching objective: mean over draws of
// ||field(x_t, t, c) - (eps - x_data)||^2 with t ~ U(0, 1], x_data ~ dist,
// eps ~ N(0, I). The squared norm sums over all tensor elements. The draw
// sequence is fully determined by `seed`.
double fm_loss(const VelocityField& field, const DataDistribution& dist,
               const Condition& condition, uint64_t n_samples, const SeedSpec& seed);

}  // namespace fd

#endif
