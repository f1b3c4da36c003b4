#include "ltc/optimizer.hpp"

#include <cmath>

#include "ltc/errors.hpp"

namespace ltc {

namespace {

void adam_update(std::span<double> param, std::span<const double> grad, Vector& m, Vector& v,
                 double lr, double bc1, double bc2, const AdamConfig& cfg) {
  if (grad.size() != param.size()) throw ContractViolation("gradient shape mismatch");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace

void optimizer_step(OptimizerState& state, ExtractorParams& extractor, HeadParams& head,
                    const Gradients& grads, std::size_t epoch, bool freeze_extractor) {
  auto ext = extractor_tensors(extractor);
  auto hd = head_tensors(head);
  const std::size_t n_tensors = ext.size() + hd.size();
  if (state.first_moment.empty()) {
    for (const auto& t : ext) {
      state.first_moment.emplace_back(t.data.size(), 0.0);
      state.second_moment.emplace_back(t.data.size(), 0.0);
    }
    for (const auto& t : hd) {
      state.first_moment.emplace_back(t.data.size(), 0.0);
      state.second_moment.emplace_back(t.data.size(), 0.0);
    }
  }
  if (state.first_moment.size() != n_tensors) throw ContractViolation("optimizer state does not match parameters");

  ++state.step;
  const double lr = state.schedule.at(epoch);
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.adam.beta1, t);
  const double bc2 = 1.0 - std::pow(state.adam.beta2, t);

  const bool update_extractor = !freeze_extractor && grads.has_extractor;
  if (update_extractor) {
    auto gext = extractor_tensors(grads.extractor);
    for (std::size_t i = 0; i < ext.size(); ++i) {
      if (i == 0 && !extractor.embedding.trainable) continue;
      adam_update(ext[i].data, gext[i].data, state.first_moment[i], state.second_moment[i], lr, bc1, bc2,
                  state.adam);
    }
    if (extractor.embedding.trainable) extractor.embedding.zero_pad_row();
  }
  auto ghd = head_tensors(grads.head);
  for (std::size_t i = 0; i < hd.size(); ++i) {
    const std::size_t k = ext.size() + i;
    adam_update(hd[i].data, ghd[i].data, state.first_moment[k], state.second_moment[k], lr, bc1, bc2,
                state.adam);
  }
}

}  // namespace ltc
