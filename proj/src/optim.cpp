#include "optim.hpp"

namespace autotuner {

AdamState make_adam_state(const AutotunerNet<float>& net, AdamParams hyper) {
    AdamState st;
    st.hyper = hyper;
    const size_t n = static_cast<size_t>(net.parameter_count());
    st.m.assign(n, 0.0f);
    st.v.assign(n, 0.0f);
    return st;
}

void adam_step(AutotunerNet<float>& net, const AutotunerNet<float>& grads,
               AdamState& state) {
    auto params = net.parameters();
    auto gs = grads.parameters();
    if (params.size() != gs.size())
        raise(ErrorKind::Shape, "adam_step: parameter/gradient count mismatch");
    size_t total = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*gs[i]))
            raise(ErrorKind::Shape, "adam_step: gradient shape mismatch");
        total += params[i]->data.size();
    }
    if (total != state.m.size() || total != state.v.size())
        raise(ErrorKind::Shape, "adam_step: optimizer state size mismatch");

    state.step += 1;
    const double b1 = state.hyper.beta1, b2 = state.hyper.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    size_t k = 0;
    for (size_t i = 0; i < params.size(); ++i) {
        float* p = params[i]->ptr();
        const float* g = gs[i]->ptr();
        const size_t n = params[i]->data.size();
        for (size_t j = 0; j < n; ++j, ++k) {
            const double gj = g[j];
            const double m = b1 * state.m[k] + (1.0 - b1) * gj;
            const double v = b2 * state.v[k] + (1.0 - b2) * gj * gj;
            state.m[k] = static_cast<float>(m);
            state.v[k] = static_cast<float>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p[j] -= static_cast<float>(state.hyper.lr * mhat /
                                       (std::sqrt(vhat) + state.hyper.eps));
        }
    }
}

std::vector<float> gru_hidden_init(Rng& rng, int64_t hidden) {
    std::vector<float> h(static_cast<size_t>(hidden));
    for (float& v : h) v = static_cast<float>(rng.normal(0.0, 1e-4));
    return h;
}

}  // namespace autotuner
