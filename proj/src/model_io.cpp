#include "myo/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "myo/error.hpp"

namespace myo {

static_assert(std::endian::native == std::endian::little,
              "model artifacts assume a little-endian host");

namespace {

constexpr std::array<char, 8> kModelMagic{'M', 'Y', 'O', 'M', 'O', 'D', 'E', 'L'};
constexpr std::array<char, 8> kMapMagic{'M', 'Y', 'O', 'R', 'F', 'M', 'A', 'P'};
constexpr std::int64_t kMaxDim = std::int64_t{1} << 24;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw ParseError(std::string("model artifact truncated while reading ") + what);
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::int64_t>(out, m.rows());
  put<std::int64_t>(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd get_matrix(std::istream& in, const char* what) {
  const auto rows = get<std::int64_t>(in, what);
  const auto cols = get<std::int64_t>(in, what);
  if (rows < 0 || cols < 0 || rows > kMaxDim || cols > kMaxDim)
    throw ParseError(std::string("model artifact: implausible shape for ") + what);
  Eigen::MatrixXd m(rows, cols);
  const auto bytes = static_cast<std::streamsize>(m.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(m.data()), bytes);
  if (in.gcount() != bytes)
    throw ParseError(std::string("model artifact truncated while reading ") + what);
  return m;
}

void expect_magic(std::istream& in, const std::array<char, 8>& magic, const char* what) {
  std::array<char, 8> buf{};
  in.read(buf.data(), 8);
  if (in.gcount() != 8 || buf != magic)
    throw ParseError(std::string("not a ") + what + " artifact (bad magic)");
}

}  // namespace

void save_feature_map(std::ostream& out, const RandomFeatureMap<double>& map) {
  out.write(kMapMagic.data(), 8);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint64_t>(out, map.seed());
  put<double>(out, map.gamma());
  put_matrix(out, map.frequencies());
  put_matrix(out, map.offsets());
}

RandomFeatureMap<double> load_feature_map(std::istream& in) {
  expect_magic(in, kMapMagic, "feature map");
  const auto version = get<std::uint32_t>(in, "map version");
  if (version != kModelFormatVersion)
    throw ParseError("unsupported feature map version " + std::to_string(version));
  const auto seed = get<std::uint64_t>(in, "map seed");
  const auto gamma = get<double>(in, "map gamma");
  Eigen::MatrixXd freq = get_matrix(in, "frequencies");
  Eigen::MatrixXd offsets = get_matrix(in, "offsets");
  if (offsets.cols() != 1) throw ParseError("feature map offsets must be a column");
  try {
    return RandomFeatureMap<double>(std::move(freq), offsets.col(0), gamma, seed);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid feature map: ") + e.what());
  }
}

void save_model(std::ostream& out, const RlscClassifier& model) {
  const auto& st = model.state();
  out.write(kModelMagic.data(), 8);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.method()));
  put<double>(out, st.lambda());
  put<std::int64_t>(out, model.input_dim());
  put<std::int64_t>(out, st.dim());
  put<std::int64_t>(out, st.classes());
  put<std::uint64_t>(out, st.samples_seen());
  put_matrix(out, st.weights());
  put_matrix(out, st.factor());
  put_matrix(out, st.accumulator());
  put<std::uint8_t>(out, model.feature_map() ? 1 : 0);
  if (model.feature_map()) save_feature_map(out, *model.feature_map());
  if (!out) throw IoError("failed writing model artifact");
}

RlscClassifier load_model(std::istream& in) {
  expect_magic(in, kModelMagic, "model");
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kModelFormatVersion)
    throw ParseError("unsupported model format version " + std::to_string(version));
  const auto method_code = get<std::uint32_t>(in, "method");
  if (method_code > static_cast<std::uint32_t>(Method::lda))
    throw ParseError("unknown method code " + std::to_string(method_code));
  const auto method = static_cast<Method>(method_code);
  if (!is_rlsc_family(method)) throw ParseError("model artifact holds a non-RLSC method");
  const auto lambda = get<double>(in, "lambda");
  const auto input_dim = get<std::int64_t>(in, "input_dim");
  const auto feature_dim = get<std::int64_t>(in, "feature_dim");
  const auto classes = get<std::int64_t>(in, "classes");
  const auto seen = get<std::uint64_t>(in, "samples_seen");
  Eigen::MatrixXd weights = get_matrix(in, "weights");
  Eigen::MatrixXd factor = get_matrix(in, "factor");
  Eigen::MatrixXd acc = get_matrix(in, "accumulator");
  const auto has_map = get<std::uint8_t>(in, "map flag");
  std::optional<RandomFeatureMap<double>> map;
  if (has_map == 1)
    map = load_feature_map(in);
  else if (has_map != 0)
    throw ParseError("corrupt feature-map flag");

  if (weights.rows() != feature_dim || weights.cols() != classes ||
      factor.rows() != feature_dim || acc.rows() != feature_dim || acc.cols() != classes)
    throw ParseError("model artifact: matrix shapes disagree with header");

  try {
    auto state = IncrementalRlsc<double>::from_parts(std::move(factor), std::move(acc),
                                                     lambda, seen);
    RlscClassifier model(method, std::move(state), input_dim, std::move(map));
    const auto& solved = model.state().weights();
    if ((weights - solved).norm() > 1e-8 * std::max(1.0, solved.norm()))
      throw ParseError("model artifact: weights inconsistent with factor/accumulator");
    return model;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid model artifact: ") + e.what());
  }
}

void save_model(const std::string& path, const RlscClassifier& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_model(out, model);
}

RlscClassifier load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return load_model(in);
}

}  // namespace myo
