#include "donet/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "donet/acquisition.hpp"
#include "donet/metrics.hpp"

namespace donet {

namespace {

MeanStd mean_std(const std::vector<ReconReport>& rows, double ReconReport::*field) {
  MeanStd r;
  if (rows.empty()) return r;
  for (const auto& row : rows) r.mean += row.*field;
  r.mean /= static_cast<double>(rows.size());
  for (const auto& row : rows) r.std += (row.*field - r.mean) * (row.*field - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(rows.size()));
  return r;
}

void summarise(EvalSummary& s) {
  s.psnr = mean_std(s.rows, &ReconReport::psnr_db);
  s.ssim = mean_std(s.rows, &ReconReport::ssim);
  s.zf_psnr = mean_std(s.rows, &ReconReport::zf_psnr_db);
  s.zf_ssim = mean_std(s.rows, &ReconReport::zf_ssim);
}

template <typename T>
Tensor<T> sample_image(const Tensor<T>& combined, std::size_t i) {
  const Shape s = combined.shape();
  std::vector<T> v(combined.plane(i, 0), combined.plane(i, 0) + s.plane());
  return Tensor<T>(Shape{1, 1, s.h, s.w}, std::move(v));
}

template <typename T>
void score_baseline(EvalSummary& out, const Dataset<T>& data, std::span<const std::size_t> idx, std::size_t offset) {
  const KSpaceMeasurement<T> meas = data.measurement(idx);
  const Tensor<T> zf = coil_combine(zero_filled_recon(meas));
  const Tensor<T> truth = coil_combine(data.targets(idx));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Tensor<T> a = sample_image(zf, i);
    const Tensor<T> b = sample_image(truth, i);
    ReconReport& r = out.rows[offset + i];
    r.sample = idx[i];
    r.zf_psnr_db = psnr(a, b);
    r.zf_ssim = ssim(a, b);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

template <typename T>
std::uint64_t cascade_flops(DONet<T>& model, std::size_t h, std::size_t w) {
  std::uint64_t total = 0;
  for (auto& block : model.blocks()) {
    for (auto& layer : block.layers()) {
      total += count_flops(layer.weight.in, layer.weight.out, h, w, layer.weight.kernel_size,
                           block.config().alpha)
                   .total_mul_adds;
    }
  }
  return total;
}

template <typename T>
EvalSummary evaluate(DONet<T>& model, const Dataset<T>& data, std::span<const std::size_t> indices,
                     std::size_t batch) {
  if (indices.empty()) throw ConfigError("evaluate needs at least one sample");
  if (batch == 0) batch = 1;
  const CascadeConfig& cfg = model.config();
  if (cfg.coils != data.coils()) {
    throw ConfigError("model expects " + std::to_string(cfg.coils) + " coils, dataset has " +
                      std::to_string(data.coils()));
  }
  const Shape s = data.target.shape();
  EvalSummary out;
  out.rows.resize(indices.size());
  const std::uint64_t flops = cascade_flops(model, s.h, s.w);
  for (std::size_t start = 0; start < indices.size(); start += batch) {
    const std::size_t count = std::min(batch, indices.size() - start);
    const auto idx = indices.subspan(start, count);
    const Tensor<T> recon = coil_combine(model.forward(data.measurement(idx), BnMode::Eval));
    const Tensor<T> truth = coil_combine(data.targets(idx));
    for (std::size_t i = 0; i < count; ++i) {
      const Tensor<T> a = sample_image(recon, i);
      const Tensor<T> b = sample_image(truth, i);
      ReconReport& r = out.rows[start + i];
      r.psnr_db = psnr(a, b);
      r.ssim = ssim(a, b);
      r.pattern = to_string(data.kspace.mask.pattern);
      r.R = data.kspace.mask.acceleration;
      r.alpha = cfg.block.alpha;
      r.T = cfg.blocks;
      r.K = cfg.block.layers;
      r.flops = flops;
    }
    score_baseline(out, data, idx, start);
  }
  summarise(out);
  return out;
}

template <typename T>
EvalSummary evaluate_zero_filled(const Dataset<T>& data, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ConfigError("evaluate needs at least one sample");
  EvalSummary out;
  out.rows.resize(indices.size());
  score_baseline(out, data, indices, 0);
  for (auto& r : out.rows) {
    r.psnr_db = r.zf_psnr_db;
    r.ssim = r.zf_ssim;
    r.pattern = to_string(data.kspace.mask.pattern);
    r.R = data.kspace.mask.acceleration;
  }
  summarise(out);
  return out;
}

void write_report_csv(const std::filesystem::path& path, const EvalSummary& summary) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << "sample,pattern,R,alpha,T,K,flops,psnr_db,ssim,zf_psnr_db,zf_ssim\n";
  for (const auto& r : summary.rows) {
    f << r.sample << ',' << r.pattern << ',' << r.R << ',' << fmt(r.alpha) << ',' << r.T << ',' << r.K << ','
      << r.flops << ',' << fmt(r.psnr_db) << ',' << fmt(r.ssim) << ',' << fmt(r.zf_psnr_db) << ','
      << fmt(r.zf_ssim) << '\n';
  }
  const ReconReport& first = summary.rows.front();
  f << "mean," << first.pattern << ',' << first.R << ',' << fmt(first.alpha) << ',' << first.T << ',' << first.K
    << ',' << first.flops << ',' << fmt(summary.psnr.mean) << ',' << fmt(summary.ssim.mean) << ','
    << fmt(summary.zf_psnr.mean) << ',' << fmt(summary.zf_ssim.mean) << '\n';
}

#define DONET_INSTANTIATE(T)                                                                             \
  template std::uint64_t cascade_flops(DONet<T>&, std::size_t, std::size_t);                             \
  template EvalSummary evaluate(DONet<T>&, const Dataset<T>&, std::span<const std::size_t>, std::size_t); \
  template EvalSummary evaluate_zero_filled(const Dataset<T>&, std::span<const std::size_t>);

DONET_INSTANTIATE(float)
DONET_INSTANTIATE(double)

}  // namespace donet
