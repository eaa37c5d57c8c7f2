#include "donet/block.hpp"

#include "donet/ops.hpp"

namespace donet {

void BlockConfig::validate() const {
  if (layers < 1) throw ConfigError("block needs at least one layer (K >= 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (channels < 1) throw ConfigError("channels must be positive");
  if (kernel % 2 == 0) throw ConfigError("kernel size must be odd");
}

template <typename T>
Block<T>::Block(std::string name, BlockConfig cfg, std::size_t coils)
    : name_(std::move(name)), cfg_(cfg), coils_(coils) {
  cfg_.validate();
  if (coils < 1) throw ConfigError("block needs at least one coil");
  const std::size_t K = cfg_.layers;
  splits_.push_back(split_for(coils, cfg_.alpha));
  for (std::size_t k = 1; k < K; ++k) splits_.push_back(split_for(cfg_.channels, cfg_.alpha));
  splits_.push_back(cfg_.alpha > 0.0 ? OctSplit{coils, coils} : OctSplit{coils, 0});
  for (std::size_t k = 1; k <= K; ++k) {
    const std::string lname = name_ + ".layer" + std::to_string(k);
    layers_.emplace_back(lname, splits_[k - 1], splits_[k], cfg_.kernel);
    if (cfg_.dense) {
      std::vector<OctSplit> hist;
      for (std::size_t j = k + 1; j-- > 0;) hist.push_back(splits_[j]);
      fuse_.emplace_back(name_ + ".fuse" + std::to_string(k), std::move(hist));
    }
  }
}

template <typename T>
Tensor<T> Block<T>::forward(const ComplexTensor<T>& x, BnMode mode) {
  if (x.shape().c != coils_) {
    throw ShapeError(name_ + ": expected " + std::to_string(coils_) + " coil channels, got " +
                     std::to_string(x.shape().c));
  }
  const std::size_t K = cfg_.layers;
  features_.clear();
  pre_activation_.clear();
  features_.reserve(K + 1);
  pre_activation_.reserve(K);
  features_.push_back(split_frequency(x, cfg_.alpha));
  for (std::size_t k = 1; k <= K; ++k) {
    pre_activation_.push_back(layers_[k - 1].forward(features_.back()));
    if (cfg_.dense) {
      std::vector<const OctFeature<T>*> hist;
      hist.push_back(&pre_activation_.back());
      for (std::size_t j = k; j-- > 0;) hist.push_back(&features_[j]);
      features_.push_back(fuse_[k - 1].forward(hist, mode));
    } else if (k < K) {
      features_.push_back(relu(pre_activation_.back()));
    } else {
      features_.push_back(pre_activation_.back());
    }
  }
  return merge_frequency(features_.back());
}

template <typename T>
ComplexTensor<T> Block<T>::backward(const Tensor<T>& grad_out) {
  const std::size_t K = cfg_.layers;
  if (features_.size() != K + 1) throw ShapeError(name_ + ": backward called before forward");
  std::vector<OctFeature<T>> g(K + 1);
  for (std::size_t j = 0; j <= K; ++j) {
    const auto& f = features_[j];
    g[j] = OctFeature<T>(f.batch(), f.split(), f.height(), f.width(), f.alpha);
  }
  g[K] = merge_frequency_backward(grad_out, splits_[K], cfg_.alpha);
  for (std::size_t k = K; k >= 1; --k) {
    OctFeature<T> g_pre;
    if (cfg_.dense) {
      std::vector<OctFeature<T>> hist = fuse_[k - 1].backward(g[k]);
      g_pre = std::move(hist[0]);
      for (std::size_t i = 1; i < hist.size(); ++i) g[k - i] += hist[i];
    } else if (k < K) {
      g_pre = relu_backward(g[k], pre_activation_[k - 1]);
    } else {
      g_pre = g[k];
    }
    g[k - 1] += layers_[k - 1].backward(g_pre);
  }
  return split_frequency_backward(g[0]);
}

template <typename T>
void Block<T>::collect(std::vector<ParamRef<T>>& out) {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    layers_[k].collect(out);
    if (cfg_.dense) fuse_[k].collect(out);
  }
}

template <typename T>
ComplexTensor<T> channels_to_complex(const Tensor<T>& x) {
  if (x.c() % 2 != 0) throw ShapeError("channels_to_complex: odd channel count");
  const std::size_t half = x.c() / 2;
  return ComplexTensor<T>(slice_channels(x, 0, half), slice_channels(x, half, half));
}

template <typename T>
Tensor<T> complex_to_channels(const ComplexTensor<T>& x) {
  return concat_channels(x.re, x.im);
}

#define DONET_INSTANTIATE(T)                                        \
  template class Block<T>;                                          \
  template ComplexTensor<T> channels_to_complex(const Tensor<T>&);  \
  template Tensor<T> complex_to_channels(const ComplexTensor<T>&);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
