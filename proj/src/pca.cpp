#include "framesift/pca.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "framesift/error.hpp"

namespace framesift {

Matrix to_matrix(std::span<const EmbeddingVector> rows) {
  if (rows.empty()) return Matrix(0, 0);
  const auto dim = rows.front().dim();
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dim() != dim)
      throw ValidationError("embedding row " + std::to_string(i + 1) + " has dim " + std::to_string(rows[i].dim()) +
                            ", expected " + std::to_string(dim));
    for (std::size_t c = 0; c < dim; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i].values[c];
  }
  return x;
}

PcaModel fit_pca(const Matrix& x, int dims) {
  if (dims < 1) throw ValidationError("fit_pca: dims must be positive");
  const auto n = x.rows(), d = x.cols();
  if (n < dims + 1)
    throw ValidationError("fit_pca: need at least " + std::to_string(dims + 1) + " samples, got " + std::to_string(n));
  if (d < dims)
    throw ValidationError("fit_pca: input dim " + std::to_string(d) + " is below " + std::to_string(dims));

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Matrix centred = x.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  const double tol = (sv.size() ? sv(0) : 0.0) * static_cast<double>(std::max(n, d)) *
                     std::numeric_limits<double>::epsilon();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > tol;
  if (rank < dims)
    throw ValidationError("fit_pca: data has rank " + std::to_string(rank) + ", cannot extract " +
                          std::to_string(dims) + " components");

  model.components.resize(dims, d);
  model.explained_variance.resize(dims);
  for (int k = 0; k < dims; ++k) {
    Eigen::VectorXd v = svd.matrixV().col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.row(k) = v.transpose();
    model.explained_variance(k) = sv(k) * sv(k) / static_cast<double>(n - 1);
  }
  return model;
}

PcaModel fit_pca(std::span<const EmbeddingVector> train, int dims) { return fit_pca(to_matrix(train), dims); }

Eigen::VectorXd transform(const PcaModel& model, const Eigen::VectorXd& v) {
  if (v.size() != model.input_dim())
    throw ValidationError("transform: vector dim " + std::to_string(v.size()) + " does not match model input dim " +
                          std::to_string(model.input_dim()));
  return model.components * (v - model.mean);
}

EmbeddingVector transform(const PcaModel& model, const EmbeddingVector& v) {
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.values.data(), static_cast<Eigen::Index>(v.dim()));
  const Eigen::VectorXd z = transform(model, x);
  return {v.frame, std::vector<double>(z.data(), z.data() + z.size())};
}

Matrix transform(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim())
    throw ValidationError("transform: input dim " + std::to_string(x.cols()) + " does not match model input dim " +
                          std::to_string(model.input_dim()));
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.dims()) throw ValidationError("reconstruct: reduced vector has the wrong dim");
  return model.components.transpose() * z + model.mean;
}

namespace {

constexpr char kPcaMagic[4] = {'F', 'S', 'P', 'C'};

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw ParseError("truncated PCA model file", 0);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kPcaMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dims()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) put_le<float>(out, static_cast<float>(model.mean(i)));
  for (Eigen::Index r = 0; r < model.components.rows(); ++r)
    for (Eigen::Index c = 0; c < model.components.cols(); ++c)
      put_le<float>(out, static_cast<float>(model.components(r, c)));
  for (Eigen::Index i = 0; i < model.explained_variance.size(); ++i)
    put_le<float>(out, static_cast<float>(model.explained_variance(i)));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

PcaModel load_pca(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (std::memcmp(magic, kPcaMagic, 4) != 0) throw ParseError(path.string() + " is not a PCA model file", 0);
  const auto input_dim = get_le<std::uint32_t>(in);
  const auto dims = get_le<std::uint32_t>(in);
  PcaModel m;
  m.mean.resize(input_dim);
  m.components.resize(dims, input_dim);
  m.explained_variance.resize(dims);
  for (Eigen::Index i = 0; i < m.mean.size(); ++i) m.mean(i) = get_le<float>(in);
  for (Eigen::Index r = 0; r < m.components.rows(); ++r)
    for (Eigen::Index c = 0; c < m.components.cols(); ++c) m.components(r, c) = get_le<float>(in);
  for (Eigen::Index i = 0; i < m.explained_variance.size(); ++i) m.explained_variance(i) = get_le<float>(in);
  return m;
}

}  // namespace framesift
