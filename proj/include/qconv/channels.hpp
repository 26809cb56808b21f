#pragma once

#include "qconv/matqi.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace qconv {

// Choi matrix on in (x) out with J = sum_ij |i><j| (x) N(|i><j|).
// Trace-preserving <=> Tr_out J = 1_in.
struct ChoiMatrix {
  Mat matrix;
  int din = 0;
  int dout = 0;
};

struct Dilation {
  // Isometry U: in -> out_hat (x) env, with the output reduced to the support
  // of N(1) and env of minimal dimension (Choi rank).
  Mat u;
  int din = 0;
  int dout = 0;  // reduced output dimension
  int denv = 0;
  // Embedding of the reduced output space back into the channel's output.
  Mat out_embed;  // dout_full x dout
};

// CPTP map in Kraus form; Choi matrix and minimal Stinespring dilation are
// cached lazily.
class Channel {
 public:
  Channel() = default;
  Channel(std::vector<Mat> kraus, std::string in_name = "A", std::string out_name = "B");
  Channel(const Channel& o);
  Channel(Channel&& o) noexcept;
  Channel& operator=(Channel o);

  const std::vector<Mat>& kraus() const { return kraus_; }
  int din() const { return din_; }
  int dout() const { return dout_; }
  const std::string& in_name() const { return in_name_; }
  const std::string& out_name() const { return out_name_; }

  Mat apply_matrix(const Mat& rho) const;
  const ChoiMatrix& choi() const;
  const Dilation& minimal_dilation() const;

 private:
  std::vector<Mat> kraus_;
  int din_ = 0, dout_ = 0;
  std::string in_name_ = "A", out_name_ = "B";

  mutable std::mutex cache_mutex_;
  mutable std::optional<ChoiMatrix> choi_;
  mutable std::optional<Dilation> dilation_;
};

// Applies the channel to the factor `acting_on` of a composite state.
DensityOperator apply(const Channel& ch, const DensityOperator& state, const std::string& acting_on);
PureState apply_isometry(const Mat& iso, int din, int dnew, const PureState& psi,
                         const std::string& acting_on, const Factors& new_factors);

ChoiMatrix choi(const Channel& ch);
Channel kraus_from_choi(const ChoiMatrix& j, const std::string& in_name = "A",
                        const std::string& out_name = "B");

Channel complementary(const Channel& ch);

Channel tensor(const Channel& a, const Channel& b);
Channel tensor_power(const Channel& a, int n);

// Channel zoo.
Channel make_identity(int d);
Channel make_erasure(int d, double q);     // output dim d+1, flag |*> last
Channel make_dephasing(double p);          // (1-p) rho + p Z rho Z
Channel make_depolarizing(int d, double p);
Channel make_schur(const Mat& s);          // Schur multiplier, S PSD with unit diagonal
Channel make_constant(const Mat& sigma);   // rho -> Tr(rho) sigma

// JSON channel-spec interface:
//   {"name": str, "din": int, "dout": int, "kraus": [[[re,im],...],...]}
// or
//   {"zoo": kind, "params": {...}}
Channel channel_from_json(const std::string& text);
Channel channel_from_file(const std::string& path);
std::string channel_to_json(const Channel& ch, const std::string& name = "channel");

// Gram vectors |phi_i> of a PSD matrix with unit diagonal (S_ij = <phi_j|phi_i>),
// reduced to the support dimension. Used by Schur-channel dilations.
std::vector<Vec> gram_vectors(const Mat& s);

// True when the channel acts as rho_ij -> S_ij rho_ij in the computational
// basis; fills S if given.
bool is_schur_diagonal(const Channel& ch, Mat* s_out = nullptr, double tol = 1e-9);

}  // namespace qconv
