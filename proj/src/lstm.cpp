#include "versecraft/lstm.hpp"

#include <cmath>

#include "versecraft/error.hpp"
#include "versecraft/rng.hpp"

namespace versecraft {

LstmCell::LstmCell(std::string name, std::size_t input_dim, std::size_t hidden_dim)
    : weight(name + ".weight", {4 * hidden_dim, input_dim + hidden_dim}),
      bias(name + ".bias", {4 * hidden_dim}),
      input_dim_(input_dim),
      hidden_dim_(hidden_dim) {
    if (input_dim == 0 || hidden_dim == 0) throw InvalidArgument("LstmCell: dimensions must be positive");
}

void LstmCell::init(Rng& rng) {
    glorot_uniform(weight.value, input_dim_ + hidden_dim_, hidden_dim_, rng);
    bias.value.fill(0.0);
    for (std::size_t k = 0; k < hidden_dim_; ++k) bias.value[hidden_dim_ + k] = 1.0;
}

LstmState lstm_step(const LstmCell& cell, std::span<const double> x, std::span<const double> h_prev,
                    std::span<const double> c_prev, LstmStepCache* cache) {
    const std::size_t in = cell.input_dim();
    const std::size_t hd = cell.hidden_dim();
    if (x.size() != in || h_prev.size() != hd || c_prev.size() != hd) {
        throw InvalidArgument("lstm_step: shape mismatch (x=" + std::to_string(x.size()) + " expected " +
                              std::to_string(in) + ", h/c expected " + std::to_string(hd) + ")");
    }

    Vec xh(in + hd);
    std::copy(x.begin(), x.end(), xh.begin());
    std::copy(h_prev.begin(), h_prev.end(), xh.begin() + static_cast<std::ptrdiff_t>(in));

    Vec z(cell.bias.value.values().begin(), cell.bias.value.values().end());
    matvec_add(cell.weight.value.values(), 4 * hd, in + hd, xh, z);

    LstmState out{Vec(hd), Vec(hd)};
    Vec i(hd), f(hd), o(hd), g(hd), tc(hd);
    for (std::size_t k = 0; k < hd; ++k) {
        i[k] = sigmoid(z[k]);
        f[k] = sigmoid(z[hd + k]);
        o[k] = sigmoid(z[2 * hd + k]);
        g[k] = std::tanh(z[3 * hd + k]);
        out.c[k] = f[k] * c_prev[k] + i[k] * g[k];
        tc[k] = std::tanh(out.c[k]);
        out.h[k] = o[k] * tc[k];
    }
    if (cache) {
        cache->xh = std::move(xh);
        cache->i = std::move(i);
        cache->f = std::move(f);
        cache->o = std::move(o);
        cache->g = std::move(g);
        cache->c_prev.assign(c_prev.begin(), c_prev.end());
        cache->tanh_c = std::move(tc);
    }
    return out;
}

void lstm_step_backward(LstmCell& cell, const LstmStepCache& cache, std::span<const double> dh,
                        std::span<const double> dc, std::span<double> dx, Vec& dh_prev, Vec& dc_prev) {
    const std::size_t in = cell.input_dim();
    const std::size_t hd = cell.hidden_dim();

    Vec dz(4 * hd);
    dc_prev.assign(hd, 0.0);
    for (std::size_t k = 0; k < hd; ++k) {
        const double dct = dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
        const double di = dct * cache.g[k];
        const double df = dct * cache.c_prev[k];
        const double dout = dh[k] * cache.tanh_c[k];
        const double dg = dct * cache.i[k];
        dz[k] = di * cache.i[k] * (1.0 - cache.i[k]);
        dz[hd + k] = df * cache.f[k] * (1.0 - cache.f[k]);
        dz[2 * hd + k] = dout * cache.o[k] * (1.0 - cache.o[k]);
        dz[3 * hd + k] = dg * (1.0 - cache.g[k] * cache.g[k]);
        dc_prev[k] = dct * cache.f[k];
    }

    outer_add(cell.weight.grad.values(), 4 * hd, in + hd, dz, cache.xh);
    add_to(cell.bias.grad.values(), dz);

    Vec dxh(in + hd, 0.0);
    matvec_t_add(cell.weight.value.values(), 4 * hd, in + hd, dz, dxh);
    for (std::size_t k = 0; k < in; ++k) dx[k] += dxh[k];
    dh_prev.assign(dxh.begin() + static_cast<std::ptrdiff_t>(in), dxh.end());
}

std::vector<Vec> bilstm_encode(const LstmCell& fw, const LstmCell& bw, std::span<const Vec> inputs,
                               std::size_t valid_length, BiLstmCache* cache) {
    if (valid_length == 0) throw InvalidArgument("bilstm_encode: valid_length must be >= 1");
    if (valid_length > inputs.size()) throw InvalidArgument("bilstm_encode: valid_length exceeds sequence");
    if (fw.hidden_dim() != bw.hidden_dim()) throw InvalidArgument("bilstm_encode: direction sizes differ");

    const std::size_t hd = fw.hidden_dim();
    std::vector<Vec> out(inputs.size(), Vec(2 * hd, 0.0));
    if (cache) {
        cache->valid = valid_length;
        cache->fw.assign(valid_length, {});
        cache->bw.assign(valid_length, {});
    }

    LstmState s{Vec(hd, 0.0), Vec(hd, 0.0)};
    for (std::size_t t = 0; t < valid_length; ++t) {
        s = lstm_step(fw, inputs[t], s.h, s.c, cache ? &cache->fw[t] : nullptr);
        std::copy(s.h.begin(), s.h.end(), out[t].begin());
    }
    s = LstmState{Vec(hd, 0.0), Vec(hd, 0.0)};
    for (std::size_t r = valid_length; r-- > 0;) {
        s = lstm_step(bw, inputs[r], s.h, s.c, cache ? &cache->bw[r] : nullptr);
        std::copy(s.h.begin(), s.h.end(), out[r].begin() + static_cast<std::ptrdiff_t>(hd));
    }
    return out;
}

void bilstm_backward(LstmCell& fw, LstmCell& bw, const BiLstmCache& cache, std::span<const Vec> d_outputs,
                     std::vector<Vec>& d_inputs) {
    const std::size_t hd = fw.hidden_dim();
    const std::size_t n = cache.valid;
    if (d_inputs.size() < n) d_inputs.resize(n, Vec(fw.input_dim(), 0.0));
    for (auto& d : d_inputs) {
        if (d.size() != fw.input_dim()) d.assign(fw.input_dim(), 0.0);
    }

    Vec dh_next(hd, 0.0), dc_next(hd, 0.0), dh(hd), dh_prev, dc_prev;
    for (std::size_t t = n; t-- > 0;) {
        for (std::size_t k = 0; k < hd; ++k) dh[k] = d_outputs[t][k] + dh_next[k];
        lstm_step_backward(fw, cache.fw[t], dh, dc_next, d_inputs[t], dh_prev, dc_prev);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    // The backward direction consumed positions n-1 .. 0, so its reverse
    // sweep visits them in ascending order.
    dh_next.assign(hd, 0.0);
    dc_next.assign(hd, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < hd; ++k) dh[k] = d_outputs[t][hd + k] + dh_next[k];
        lstm_step_backward(bw, cache.bw[t], dh, dc_next, d_inputs[t], dh_prev, dc_prev);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
}

}  // namespace versecraft
