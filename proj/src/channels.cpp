#include "qconv/channels.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qconv {

Channel::Channel(std::vector<Mat> kraus, std::string in_name, std::string out_name)
    : kraus_(std::move(kraus)), in_name_(std::move(in_name)), out_name_(std::move(out_name)) {
  if (kraus_.empty()) throw std::invalid_argument("channel needs at least one Kraus operator");
  dout_ = static_cast<int>(kraus_[0].rows());
  din_ = static_cast<int>(kraus_[0].cols());
  check_guard(static_cast<std::int64_t>(din_) * dout_);
  Mat sum = Mat::Zero(din_, din_);
  for (const auto& k : kraus_) {
    if (k.rows() != dout_ || k.cols() != din_)
      throw std::invalid_argument("Kraus operators must share dimensions");
    sum += k.adjoint() * k;
  }
  if ((sum - Mat::Identity(din_, din_)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("Kraus operators do not satisfy sum K^dag K = 1");
}

Channel::Channel(const Channel& o)
    : kraus_(o.kraus_), din_(o.din_), dout_(o.dout_), in_name_(o.in_name_), out_name_(o.out_name_) {
  std::lock_guard<std::mutex> lk(o.cache_mutex_);
  choi_ = o.choi_;
  dilation_ = o.dilation_;
}

Channel::Channel(Channel&& o) noexcept
    : kraus_(std::move(o.kraus_)),
      din_(o.din_),
      dout_(o.dout_),
      in_name_(std::move(o.in_name_)),
      out_name_(std::move(o.out_name_)),
      choi_(std::move(o.choi_)),
      dilation_(std::move(o.dilation_)) {}

Channel& Channel::operator=(Channel o) {
  kraus_ = std::move(o.kraus_);
  din_ = o.din_;
  dout_ = o.dout_;
  in_name_ = std::move(o.in_name_);
  out_name_ = std::move(o.out_name_);
  choi_ = std::move(o.choi_);
  dilation_ = std::move(o.dilation_);
  return *this;
}

Mat Channel::apply_matrix(const Mat& rho) const {
  if (rho.rows() != din_ || rho.cols() != din_)
    throw std::invalid_argument("apply: state dimension does not match channel input");
  Mat out = Mat::Zero(dout_, dout_);
  for (const auto& k : kraus_) out.noalias() += k * rho * k.adjoint();
  return out;
}

const ChoiMatrix& Channel::choi() const {
  std::lock_guard<std::mutex> lk(cache_mutex_);
  if (!choi_) {
    Mat j = Mat::Zero(static_cast<Eigen::Index>(din_) * dout_, static_cast<Eigen::Index>(din_) * dout_);
    for (const auto& k : kraus_) {
      // J += vec vec^dag with vec[(i,a)] = K[a,i]  (input major).
      Vec v(static_cast<Eigen::Index>(din_) * dout_);
      for (int i = 0; i < din_; ++i)
        for (int a = 0; a < dout_; ++a) v[static_cast<Eigen::Index>(i) * dout_ + a] = k(a, i);
      j.noalias() += v * v.adjoint();
    }
    choi_ = ChoiMatrix{std::move(j), din_, dout_};
  }
  return *choi_;
}

const Dilation& Channel::minimal_dilation() const {
  {
    std::lock_guard<std::mutex> lk(cache_mutex_);
    if (dilation_) return *dilation_;
  }
  // Output reduction: support of N(1).
  Mat none = Mat::Zero(dout_, dout_);
  for (const auto& k : kraus_) none.noalias() += k * k.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(none));
  const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-9 * top) keep.push_back(static_cast<int>(i));
  const int dbh = static_cast<int>(keep.size());
  Mat q(dout_, dbh);
  for (int c = 0; c < dbh; ++c) q.col(c) = es.eigenvectors().col(keep[c]);

  // Reduced Kraus, then minimal set from the Choi eigendecomposition.
  std::vector<Mat> red;
  red.reserve(kraus_.size());
  for (const auto& k : kraus_) red.push_back(q.adjoint() * k);
  Channel reduced(red, in_name_, out_name_);
  const ChoiMatrix& j = reduced.choi();
  Eigen::SelfAdjointEigenSolver<Mat> ej(j.matrix);
  const double jtop = std::max(ej.eigenvalues().maxCoeff(), 1e-300);
  std::vector<int> kept;
  for (Eigen::Index i = 0; i < ej.eigenvalues().size(); ++i)
    if (ej.eigenvalues()[i] > 1e-9 * jtop) kept.push_back(static_cast<int>(i));
  const int denv = static_cast<int>(kept.size());

  Mat u = Mat::Zero(static_cast<Eigen::Index>(dbh) * denv, din_);
  for (int e = 0; e < denv; ++e) {
    const double w = std::sqrt(ej.eigenvalues()[kept[e]]);
    for (int i = 0; i < din_; ++i)
      for (int b = 0; b < dbh; ++b)
        u(static_cast<Eigen::Index>(b) * denv + e, i) =
            w * ej.eigenvectors()(static_cast<Eigen::Index>(i) * dbh + b, kept[e]);
  }
  Dilation d{std::move(u), din_, dbh, denv, std::move(q)};
  std::lock_guard<std::mutex> lk(cache_mutex_);
  if (!dilation_) dilation_ = std::move(d);
  return *dilation_;
}

DensityOperator apply(const Channel& ch, const DensityOperator& state, const std::string& acting_on) {
  const Factors& fs = state.factors();
  const int pos = factor_index(fs, acting_on);
  if (fs[pos].dim != ch.din())
    throw std::invalid_argument("apply: factor dimension does not match channel input");
  int dbefore = 1, dafter = 1;
  for (int i = 0; i < pos; ++i) dbefore *= fs[i].dim;
  for (std::size_t i = pos + 1; i < fs.size(); ++i) dafter *= fs[i].dim;
  Factors out_fs = fs;
  out_fs[pos].dim = ch.dout();
  check_guard(static_cast<std::int64_t>(dbefore) * ch.dout() * dafter);

  Mat ib = Mat::Identity(dbefore, dbefore);
  Mat ia = Mat::Identity(dafter, dafter);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(dbefore) * ch.dout() * dafter,
                      static_cast<Eigen::Index>(dbefore) * ch.dout() * dafter);
  for (const auto& k : ch.kraus()) {
    Mat full = kron(kron(ib, k), ia);
    out.noalias() += full * state.matrix() * full.adjoint();
  }
  return DensityOperator(std::move(out), std::move(out_fs), state.normalized());
}

PureState apply_isometry(const Mat& iso, int din, int dnew, const PureState& psi,
                         const std::string& acting_on, const Factors& new_factors) {
  const Factors& fs = psi.factors();
  const int pos = factor_index(fs, acting_on);
  if (fs[pos].dim != din) throw std::invalid_argument("apply_isometry: dimension mismatch");
  if (iso.rows() != dnew || iso.cols() != din)
    throw std::invalid_argument("apply_isometry: matrix shape mismatch");
  int dbefore = 1, dafter = 1;
  for (int i = 0; i < pos; ++i) dbefore *= fs[i].dim;
  for (std::size_t i = pos + 1; i < fs.size(); ++i) dafter *= fs[i].dim;
  check_guard(static_cast<std::int64_t>(dbefore) * dnew * dafter);
  Mat full = kron(kron(Mat::Identity(dbefore, dbefore), iso), Mat::Identity(dafter, dafter));
  Vec v = full * psi.vector();

  Factors out_fs;
  for (int i = 0; i < pos; ++i) out_fs.push_back(fs[i]);
  for (const auto& f : new_factors) out_fs.push_back(f);
  for (std::size_t i = pos + 1; i < fs.size(); ++i) out_fs.push_back(fs[i]);
  if (total_dim(out_fs) != v.size())
    throw std::invalid_argument("apply_isometry: new factors do not match output dimension");
  return PureState(std::move(v), std::move(out_fs));
}

ChoiMatrix choi(const Channel& ch) { return ch.choi(); }

Channel kraus_from_choi(const ChoiMatrix& j, const std::string& in_name,
                        const std::string& out_name) {
  const int din = j.din, dout = j.dout;
  if (j.matrix.rows() != static_cast<Eigen::Index>(din) * dout)
    throw std::invalid_argument("Choi matrix dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(j.matrix));
  const double top = std::max(std::abs(es.eigenvalues().maxCoeff()), 1e-300);
  if (es.eigenvalues().minCoeff() < -1e-7 * std::max(top, 1.0))
    throw std::invalid_argument("Choi matrix is not PSD");
  // Trace-preserving condition Tr_out J = 1_in.
  Factors fs{{"i", din}, {"o", dout}};
  Mat tin = partial_trace(j.matrix, fs, {"i"});
  if ((tin - Mat::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-7)
    throw std::invalid_argument("Choi matrix violates the trace-preserving condition");
  std::vector<Mat> ks;
  for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
    if (es.eigenvalues()[e] <= 1e-10 * top) continue;
    const double w = std::sqrt(es.eigenvalues()[e]);
    Mat k(dout, din);
    for (int i = 0; i < din; ++i)
      for (int a = 0; a < dout; ++a) k(a, i) = w * es.eigenvectors()(static_cast<Eigen::Index>(i) * dout + a, e);
    ks.push_back(std::move(k));
  }
  return Channel(std::move(ks), in_name, out_name);
}

Channel complementary(const Channel& ch) {
  const Dilation& d = ch.minimal_dilation();
  std::vector<Mat> ks;
  ks.reserve(d.dout);
  for (int b = 0; b < d.dout; ++b) {
    Mat k(d.denv, d.din);
    for (int e = 0; e < d.denv; ++e)
      for (int i = 0; i < d.din; ++i) k(e, i) = d.u(static_cast<Eigen::Index>(b) * d.denv + e, i);
    ks.push_back(std::move(k));
  }
  return Channel(std::move(ks), ch.in_name(), "E");
}

Channel tensor(const Channel& a, const Channel& b) {
  check_guard(static_cast<std::int64_t>(a.din()) * b.din() * a.dout() * b.dout());
  std::vector<Mat> ks;
  ks.reserve(a.kraus().size() * b.kraus().size());
  for (const auto& ka : a.kraus())
    for (const auto& kb : b.kraus()) ks.push_back(kron(ka, kb));
  return Channel(std::move(ks), a.in_name(), a.out_name());
}

Channel tensor_power(const Channel& a, int n) {
  if (n < 1) throw std::invalid_argument("tensor_power: n must be >= 1");
  Channel out = a;
  for (int i = 1; i < n; ++i) out = tensor(out, a);
  return out;
}

Channel make_identity(int d) {
  return Channel({Mat::Identity(d, d)});
}

Channel make_erasure(int d, double q) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("erasure: q must lie in [0,1]");
  if (d < 1) throw std::invalid_argument("erasure: d must be >= 1");
  std::vector<Mat> ks;
  Mat embed = Mat::Zero(d + 1, d);
  embed.topRows(d) = Mat::Identity(d, d);
  if (q < 1.0) ks.push_back(std::sqrt(1.0 - q) * embed);
  if (q > 0.0)
    for (int i = 0; i < d; ++i) {
      Mat k = Mat::Zero(d + 1, d);
      k(d, i) = std::sqrt(q);
      ks.push_back(std::move(k));
    }
  return Channel(std::move(ks));
}

Channel make_dephasing(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("dephasing: p must lie in [0,1]");
  Mat z = Mat::Identity(2, 2);
  z(1, 1) = -1.0;
  std::vector<Mat> ks;
  if (p < 1.0) ks.push_back(std::sqrt(1.0 - p) * Mat::Identity(2, 2));
  if (p > 0.0) ks.push_back(std::sqrt(p) * z);
  return Channel(std::move(ks));
}

Channel make_depolarizing(int d, double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing: p must lie in [0,1]");
  std::vector<Mat> ks;
  if (p < 1.0) ks.push_back(std::sqrt(1.0 - p) * Mat::Identity(d, d));
  if (p > 0.0)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Mat k = Mat::Zero(d, d);
        k(i, j) = std::sqrt(p / d);
        ks.push_back(std::move(k));
      }
  return Channel(std::move(ks));
}

Channel make_schur(const Mat& s) {
  const int d = static_cast<int>(s.rows());
  if (s.cols() != d) throw std::invalid_argument("schur: S must be square");
  if (!is_hermitian(s, 1e-9)) throw std::invalid_argument("schur: S must be Hermitian");
  for (int i = 0; i < d; ++i)
    if (std::abs(s(i, i).real() - 1.0) > 1e-9 || std::abs(s(i, i).imag()) > 1e-9)
      throw std::invalid_argument("schur: S must have unit diagonal");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(s));
  if (es.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument("schur: S must be PSD");
  std::vector<Mat> ks;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (es.eigenvalues()[k] <= 1e-12) continue;
    Mat m = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = std::sqrt(es.eigenvalues()[k]) * es.eigenvectors()(i, k);
    ks.push_back(std::move(m));
  }
  return Channel(std::move(ks));
}

Channel make_constant(const Mat& sigma) {
  const int d = static_cast<int>(sigma.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(sigma));
  if (es.eigenvalues().minCoeff() < -1e-9 || std::abs(sigma.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("constant: sigma must be a normalized state");
  std::vector<Mat> ks;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (es.eigenvalues()[k] <= 1e-12) continue;
    for (int j = 0; j < d; ++j) {
      Mat m = Mat::Zero(d, d);
      m.col(j) = std::sqrt(es.eigenvalues()[k]) * es.eigenvectors().col(k);
      ks.push_back(std::move(m));
    }
  }
  return Channel(std::move(ks));
}

std::vector<Vec> gram_vectors(const Mat& s) {
  const int d = static_cast<int>(s.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(s));
  const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  std::vector<int> keep;
  for (Eigen::Index k = 0; k < d; ++k)
    if (es.eigenvalues()[k] > 1e-10 * top) keep.push_back(static_cast<int>(k));
  std::vector<Vec> phi(d);
  const int r = static_cast<int>(keep.size());
  for (int i = 0; i < d; ++i) {
    Vec v(r);
    for (int k = 0; k < r; ++k)
      v[k] = std::sqrt(es.eigenvalues()[keep[k]]) * es.eigenvectors()(i, keep[k]);
    phi[i] = std::move(v);
  }
  return phi;
}

bool is_schur_diagonal(const Channel& ch, Mat* s_out, double tol) {
  if (ch.din() != ch.dout()) return false;
  const int d = ch.din();
  const Mat& j = ch.choi().matrix;
  Mat s(d, d);
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj) {
      // N(|i><jj|)[a,b] = J[(i,a),(jj,b)]
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const cxd v = j(static_cast<Eigen::Index>(i) * d + a, static_cast<Eigen::Index>(jj) * d + b);
          if (a == i && b == jj) {
            s(i, jj) = v;
          } else if (std::abs(v) > tol) {
            return false;
          }
        }
    }
  if (s_out) *s_out = s;
  return true;
}

// ---- JSON interface --------------------------------------------------------

static Mat parse_complex_matrix(const nlohmann::json& jm) {
  const int rows = static_cast<int>(jm.size());
  if (rows == 0) throw std::invalid_argument("channel json: empty matrix");
  const int cols = static_cast<int>(jm.at(0).size());
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(jm.at(r).size()) != cols)
      throw std::invalid_argument("channel json: ragged matrix");
    for (int c = 0; c < cols; ++c) {
      const auto& e = jm.at(r).at(c);
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("channel json: matrix entries must be [re, im]");
      m(r, c) = cxd(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

Channel channel_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("channel json: parse error: ") + e.what());
  }
  if (j.contains("zoo")) {
    const std::string kind = j.at("zoo").get<std::string>();
    const nlohmann::json params = j.value("params", nlohmann::json::object());
    if (kind == "identity") return make_identity(params.at("d").get<int>());
    if (kind == "erasure") return make_erasure(params.at("d").get<int>(), params.at("q").get<double>());
    if (kind == "dephasing") return make_dephasing(params.at("p").get<double>());
    if (kind == "depolarizing")
      return make_depolarizing(params.at("d").get<int>(), params.at("p").get<double>());
    if (kind == "schur") return make_schur(parse_complex_matrix(params.at("s")));
    if (kind == "constant") return make_constant(parse_complex_matrix(params.at("sigma")));
    throw std::invalid_argument("channel json: unknown zoo kind: " + kind);
  }
  if (!j.contains("kraus")) throw std::invalid_argument("channel json: needs 'kraus' or 'zoo'");
  std::vector<Mat> ks;
  for (const auto& jm : j.at("kraus")) ks.push_back(parse_complex_matrix(jm));
  const int din = j.value("din", static_cast<int>(ks.at(0).cols()));
  const int dout = j.value("dout", static_cast<int>(ks.at(0).rows()));
  if (din != ks.at(0).cols() || dout != ks.at(0).rows())
    throw std::invalid_argument("channel json: din/dout do not match the Kraus shapes");
  return Channel(std::move(ks));
}

Channel channel_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open channel file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return channel_from_json(ss.str());
}

std::string channel_to_json(const Channel& ch, const std::string& name) {
  nlohmann::json j;
  j["name"] = name;
  j["din"] = ch.din();
  j["dout"] = ch.dout();
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& k : ch.kraus()) {
    nlohmann::json jm = nlohmann::json::array();
    for (int r = 0; r < k.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < k.cols(); ++c)
        row.push_back(nlohmann::json::array({k(r, c).real(), k(r, c).imag()}));
      jm.push_back(row);
    }
    ks.push_back(jm);
  }
  j["kraus"] = ks;
  return j.dump(2);
}

}  // namespace qconv
