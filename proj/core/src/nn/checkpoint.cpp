#include "batchlab/nn/checkpoint.hpp"

#include "batchlab/common/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace batchlab::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'B', 'L', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kMaxLayerWidth = 1u << 20;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated checkpoint record");
  return v;
}

void put_values(std::ostream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.values().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void get_values(std::istream& in, Tensor& t) {
  in.read(reinterpret_cast<char*>(t.values().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!in) throw FormatError("truncated checkpoint payload");
  if (!t.all_finite()) throw FormatError("checkpoint payload holds non-finite values");
}

}  // namespace

void write_mlp(std::ostream& out, const MlpParams& params) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, params.activation == Activation::relu ? 0u : 1u);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (auto s : params.layer_sizes) put<std::uint64_t>(out, s);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    put_values(out, params.weights[l]);
    put_values(out, params.biases[l]);
  }
  if (!out) throw FormatError("failed writing network checkpoint");
}

MlpParams read_mlp(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("bad network checkpoint magic");
  if (get<std::uint32_t>(in) != kVersion) throw FormatError("unsupported network checkpoint version");
  const auto act = get<std::uint32_t>(in);
  if (act > 1) throw FormatError("bad activation code in checkpoint");
  const auto n = get<std::uint32_t>(in);
  if (n < 2 || n > 64) throw FormatError("bad layer count in checkpoint");
  std::vector<std::size_t> sizes;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto s = get<std::uint64_t>(in);
    if (s == 0 || s > kMaxLayerWidth) throw FormatError("bad layer size in checkpoint");
    sizes.push_back(static_cast<std::size_t>(s));
  }
  MlpParams p = MlpParams::zeros(std::move(sizes), act == 0 ? Activation::relu : Activation::tanh);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    get_values(in, p.weights[l]);
    get_values(in, p.biases[l]);
  }
  return p;
}

void write_tensor(std::ostream& out, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) put<std::uint64_t>(out, d);
  put_values(out, t);
  if (!out) throw FormatError("failed writing tensor");
}

Tensor read_tensor(std::istream& in) {
  const auto rank = get<std::uint32_t>(in);
  if (rank > 2) throw FormatError("bad tensor rank in checkpoint");
  std::vector<std::size_t> shape;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto d = get<std::uint64_t>(in);
    if (d > kMaxLayerWidth * 64) throw FormatError("bad tensor dimension in checkpoint");
    shape.push_back(static_cast<std::size_t>(d));
  }
  Tensor t(std::move(shape), 0.0);
  get_values(in, t);
  return t;
}

}  // namespace batchlab::nn
