// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <armadillo>
#include <memory>
#include <vector>

#include "irsce/channel_model.hpp"

namespace irsce {

/// Largest dense Psi (entries) materialized by default.
inline constexpr arma::uword kDenseDictionaryCap = arma::uword{1} << 20;

/// Oversampled angular dictionary for both ends of the link.
///
/// Receive atoms enumerate the azimuth x elevation grid with elevation
/// varying fastest. An array with a single element has an angle-independent
/// steering vector, so its grid collapses to one point.
struct RedundantDictionary {
    arma::uword beta = 1;
    std::vector<AnglePair> rx_grid;
    std::vector<AnglePair> tx_grid;
    arma::cx_mat a_r;  ///< N_IRS x |rx_grid|
    arma::cx_mat a_t;  ///< N_UE x |tx_grid|

    arma::uword rx_size() const { return a_r.n_cols; }
    arma::uword tx_size() const { return a_t.n_cols; }
    arma::uword size() const { return rx_size() * tx_size(); }

    /// Column g of Psi = conj(A_T) kron A_R, with g = t * rx_size() + r.
    arma::cx_vec atom(arma::uword g) const;
    /// Columns of Psi selected by `support`.
    arma::cx_mat atoms(const arma::uvec& support) const;
    /// Dense Psi; throws std::length_error above `cap` entries.
    arma::cx_mat psi(arma::uword cap = kDenseDictionaryCap) const;
};

/// Angle pairs phi_i = -pi/2 + i pi / (beta n_w), i = 1 .. beta n_w (same for
/// elevation over beta n_h), elevation fastest.
std::vector<AnglePair> angle_grid(arma::uword n_w, arma::uword n_h, arma::uword beta);

/// Steering vectors evaluated at each grid point, one per column.
arma::cx_mat steering_bank(const std::vector<AnglePair>& grid, arma::uword n_w, arma::uword n_h, double spacing);

RedundantDictionary build_dictionary(const ScenarioConfig& config, arma::uword beta);

/// Effective sensing operator A = Phi Psi (M x |grid|).
///
/// Products go through the Kronecker structure of Psi and never form it.
class SensingOperator {
public:
    SensingOperator(arma::cx_mat phi, std::shared_ptr<const RedundantDictionary> dict);

    arma::uword n_rows() const { return phi_.n_rows; }
    arma::uword n_cols() const { return dict_->size(); }

    const arma::cx_mat& phi() const { return phi_; }
    const RedundantDictionary& dictionary() const { return *dict_; }

    arma::cx_vec apply(const arma::cx_vec& x) const;
    arma::cx_vec adjoint(const arma::cx_vec& y) const;

    /// Dense A assembled row by row through the adjoint.
    arma::cx_mat effective_matrix() const;
    /// Dense Phi * Psi through an explicit Psi (subject to the size cap).
    arma::cx_mat dense_product(arma::uword cap = kDenseDictionaryCap) const;

private:
    arma::cx_mat phi_;
    std::shared_ptr<const RedundantDictionary> dict_;
    arma::uword n_irs_;
    arma::uword n_ue_;
};

} // namespace irsce
