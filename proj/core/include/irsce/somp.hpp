// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <armadillo>

#include "irsce/channel_model.hpp"
#include "irsce/dictionary.hpp"

namespace irsce {

/// How an atom's correlations with the K residuals are combined.
enum class AtomScore {
    l1,  ///< sum_k |a^H r_k|
    l2,  ///< sqrt(sum_k |a^H r_k|^2)
};

/// SOMP termination: stop once every subcarrier residual is within
/// `residual_threshold`, or after `max_atoms` selections, whichever first.
struct StopRule {
    arma::uword max_atoms = 0;
    double residual_threshold = 0.0;

    static StopRule sparsity(arma::uword atoms) { return {atoms, 0.0}; }
    static StopRule residual(double epsilon, arma::uword cap) { return {cap, epsilon}; }

    /// epsilon = sqrt(M noise_var) (1 + delta), cap = min(M, 2 L).
    static StopRule noise_floor(arma::uword measurements, double noise_var, arma::uword n_paths, double delta = 0.1);
};

struct SompOptions {
    AtomScore score = AtomScore::l1;
    /// Orthogonal remainder below this fraction of an atom's norm is treated
    /// as a rank-deficient selection.
    double rank_tolerance = 1e-10;
};

/// Common-support sparse estimate of K angular channel vectors.
struct SparseEstimate {
    arma::uvec support;          ///< selected grid indices, in selection order
    arma::cx_mat coefficients;   ///< |S| x K
    arma::uword grid_rx = 0;
    arma::uword grid_tx = 1;
    /// Row i holds the K residual norms after i selections (row 0: ||y_k||).
    arma::mat residual_norms;
    /// Set when the final fit fell back to Tikhonov-regularized least squares.
    bool regularized = false;

    arma::uword grid_size() const { return grid_rx * grid_tx; }
    arma::uword n_subcarriers() const { return coefficients.n_cols; }

    /// Dense grid x K angular-frequency matrix, zero off the support.
    arma::cx_mat angular_frequency() const;
};

/// Simultaneous OMP over the columns of y (M x K) against dense A (M x G).
SparseEstimate somp(const arma::cx_mat& y, const arma::cx_mat& a, const StopRule& stop,
                    const SompOptions& options = {});
/// As above; the grid shape is taken from the operator's dictionary.
SparseEstimate somp(const arma::cx_mat& y, const SensingOperator& op, const StopRule& stop,
                    const SompOptions& options = {});

/// H_k = unvec(Psi_S c_k).
FrequencyChannel reconstruct_spatial(const SparseEstimate& est, const RedundantDictionary& dict);
/// H_k = unvec(Psi h_k) for a dense grid x K angular-frequency matrix.
FrequencyChannel synthesize_spatial(const arma::cx_mat& angular_frequency, const RedundantDictionary& dict);

enum class DftConvention {
    unitary,       ///< T entries scaled by 1/sqrt(K)
    unnormalized,  ///< plain DFT; the inverse carries the 1/K
};

/// T(d, k) = exp(-j 2 pi d k / K), scaled per the convention.
arma::cx_mat dft_matrix(arma::uword k, DftConvention convention = DftConvention::unitary);

/// Angular rows x delay columns.
struct AngularDelayGrid {
    arma::cx_mat matrix;
    DftConvention convention = DftConvention::unitary;
};

/// G = H T^H.
AngularDelayGrid angular_delay_transform(const arma::cx_mat& angular_frequency,
                                         DftConvention convention = DftConvention::unitary);
/// H = G T (inverse of angular_delay_transform).
arma::cx_mat angular_frequency(const AngularDelayGrid& grid);

/// Spatial-frequency channel from an (enhanced) angular-delay grid.
FrequencyChannel final_channel(const AngularDelayGrid& enhanced, const RedundantDictionary& dict);

} // namespace irsce
