#include "mlgcn/model_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

namespace mlgcn {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'G', 'C'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
  const std::string& data;
  std::size_t pos = 0;
  const std::string path;

  void require(std::size_t bytes, const char* what) {
    if (pos + bytes > data.size()) {
      throw ModelIoError(path + ": truncated model file while reading " + what);
    }
  }

  std::uint64_t take_u64(const char* what) {
    require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }

  double take_f64(const char* what) { return std::bit_cast<double>(take_u64(what)); }
};

void read_matrix(Reader& reader, DenseMatrix& m, std::size_t rows, std::size_t cols,
                 const char* what) {
  m = DenseMatrix(rows, cols);
  for (double& v : m.values) {
    v = reader.take_f64(what);
  }
}

}  // namespace

void write_model(const std::filesystem::path& path, const GcnParams& params,
                 const LabelEmbedding& embedding) {
  const std::size_t d = params.w0.rows;
  const std::size_t h = params.w0.cols;
  const std::size_t c = params.w1.cols;
  if (params.w1.rows != h || embedding.z.rows != c || embedding.z.cols != h) {
    throw ModelIoError("write_model: tensor shapes are inconsistent");
  }
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  out.push_back(static_cast<char>(kVersion));
  put_u64(out, d);
  put_u64(out, h);
  put_u64(out, c);
  for (double v : params.w0.values) {
    put_f64(out, v);
  }
  for (double v : params.w1.values) {
    put_f64(out, v);
  }
  for (double v : embedding.z.values) {
    put_f64(out, v);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw ModelIoError("cannot write model file: " + path.string());
  }
  file << out;
}

ModelFile read_model(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw ModelIoError("cannot open model file: " + path.string());
  }
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  Reader reader{data, 0, path.string()};

  reader.require(sizeof(kMagic), "magic");
  if (data.compare(0, sizeof(kMagic), kMagic, sizeof(kMagic)) != 0) {
    throw ModelIoError(path.string() + ": bad magic, not a model file");
  }
  reader.pos = sizeof(kMagic);
  reader.require(1, "version");
  const auto version = static_cast<std::uint8_t>(data[reader.pos]);
  reader.pos += 1;
  if (version != kVersion) {
    throw ModelIoError(path.string() + ": unsupported model version " +
                       std::to_string(version));
  }

  ModelFile model;
  model.d = reader.take_u64("d");
  model.h = reader.take_u64("h");
  model.c = reader.take_u64("c");
  read_matrix(reader, model.params.w0, model.d, model.h, "W0");
  read_matrix(reader, model.params.w1, model.h, model.c, "W1");
  read_matrix(reader, model.embedding.z, model.c, model.h, "Z");
  if (reader.pos != data.size()) {
    throw ModelIoError(path.string() + ": trailing bytes after model payload");
  }
  return model;
}

}  // namespace mlgcn
