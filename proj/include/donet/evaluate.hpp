#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "donet/cascade.hpp"
#include "donet/dataset.hpp"

namespace donet {

struct ReconReport {
  std::size_t sample = 0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double zf_psnr_db = 0.0;
  double zf_ssim = 0.0;
  std::string pattern;
  int R = 0;
  double alpha = 0.0;
  std::size_t T = 0;
  std::size_t K = 0;
  std::uint64_t flops = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct EvalSummary {
  std::vector<ReconReport> rows;
  MeanStd psnr, ssim, zf_psnr, zf_ssim;
};

// Multiply-adds of every Dual-OctConv layer in the cascade for one h x w sample.
template <typename T>
std::uint64_t cascade_flops(DONet<T>& model, std::size_t h, std::size_t w);

// Reconstructs the listed samples (eval-mode BN, processed in chunks of
// `batch`), combines coils by RSS and scores magnitude PSNR/SSIM against the
// combined target, alongside the zero-filled baseline.
template <typename T>
EvalSummary evaluate(DONet<T>& model, const Dataset<T>& data, std::span<const std::size_t> indices,
                     std::size_t batch = 4);

// Zero-filled baseline only.
template <typename T>
EvalSummary evaluate_zero_filled(const Dataset<T>& data, std::span<const std::size_t> indices);

// One row per sample plus a trailing "mean" row.
void write_report_csv(const std::filesystem::path& path, const EvalSummary& summary);

// Side-by-side reconstruction | ground truth | 5x absolute error (hot colormap)
// for one sample, as an 8-bit RGB PNG.
template <typename T>
void write_error_grid(const std::filesystem::path& path, const Tensor<T>& recon, const Tensor<T>& truth);

// 8-bit RGB, row-major, 3 bytes per pixel.
void write_png_rgb(const std::filesystem::path& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& rgb);

}  // namespace donet
