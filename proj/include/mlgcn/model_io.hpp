#pragma once

#include <filesystem>
#include <stdexcept>

#include "mlgcn/embed_loss.hpp"
#include "mlgcn/gcn.hpp"

namespace mlgcn {

class ModelIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFile {
  std::size_t d = 0;
  std::size_t h = 0;
  std::size_t c = 0;
  GcnParams params;
  LabelEmbedding embedding;
};

// Binary layout: magic "MLGC", one version byte, then d, h, c as 64-bit
// little-endian unsigned integers, then W0 (d x h), W1 (h x c) and Z (c x h)
// as row-major 64-bit little-endian floats.
void write_model(const std::filesystem::path& path, const GcnParams& params,
                 const LabelEmbedding& embedding);

ModelFile read_model(const std::filesystem::path& path);

}  // namespace mlgcn
