#include "wg/quenched.hpp"

#include <limits>

#include "wg/error.hpp"

namespace wg {

QuenchedEnsemble::QuenchedEnsemble(LayoutPtr layout, DisorderConfig eta, QuenchedOptions opt)
    : layout_(std::move(layout)), eta_(std::move(eta)), opt_(opt) {
    if (eta_.size() != layout_->box_size()) throw DomainError("disorder must cover the box");
    for (int e : eta_)
        if (e < 0 || e >= layout_->spec().disorder_radix()) throw DomainError("disorder index out of range");
    model_ = bind_energy(*layout_, eta_);
}

QuenchedEnsemble QuenchedEnsemble::make(ModelPtr spec, Box box, BoundaryCondition bc,
                                        DisorderConfig eta, QuenchedOptions opt) {
    return QuenchedEnsemble(std::make_shared<const Layout>(std::move(spec), std::move(box), std::move(bc)),
                            std::move(eta), opt);
}

LogReal log_partition(const QuenchedEnsemble& ens) {
    return {log_partition(ens.energy_model(), ens.layout().box(), ens.options())};
}

double gibbs_probability(const QuenchedEnsemble& ens, std::span<const int> sigma) {
    if (sigma.size() != ens.layout().box_size()) throw DomainError("spin configuration has wrong length");
    return std::exp(-ens.energy(sigma) - log_partition(ens).log);
}

std::vector<double> expectations(
    const QuenchedEnsemble& ens,
    const std::vector<std::function<double(std::span<const int>)>>& observables) {
    double m = std::numeric_limits<double>::infinity();
    double sw = 0.0;
    std::vector<double> so(observables.size(), 0.0);
    for_each_configuration(
        ens.energy_model(),
        [&](std::span<const int> s, double e) {
            if (e < m) {
                if (sw > 0.0) {
                    const double f = std::exp(e - m);
                    sw *= f;
                    for (double& x : so) x *= f;
                }
                m = e;
            }
            const double w = std::exp(m - e);
            sw += w;
            for (std::size_t k = 0; k < observables.size(); ++k) so[k] += w * observables[k](s);
        },
        ens.options().enumeration_cap);
    for (double& x : so) x /= sw;
    return so;
}

double expectation(const QuenchedEnsemble& ens,
                   const std::function<double(std::span<const int>)>& observable) {
    return expectations(ens, {observable})[0];
}

double magnetization(const QuenchedEnsemble& ens, const Site& x) {
    const ModelSpec& spec = ens.layout().spec();
    if (!spec.is_ising()) throw DomainError("magnetization needs the Ising spin alphabet {-1,+1}");
    const std::size_t i = ens.layout().box_index(x);
    const std::vector<int> sv = spec.spin_values();
    return expectation(ens, [i, &sv](std::span<const int> s) { return static_cast<double>(sv[s[i]]); });
}

}  // namespace wg
