#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ranla {

inline constexpr int kNumMcs = 28;
inline constexpr int kMaxRank = 4;
inline constexpr int kMaxHarqTx = 5;

// PHY abstraction constants at numerology mu=0.
inline constexpr double kPrbBandwidthHz = 180e3;  // 12 subcarriers x 15 kHz
inline constexpr int kSymbolsPerPrbTti = 12 * 14;
inline constexpr double kDataRatio = 0.8;  // share of REs carrying data
inline constexpr double kHarqCombiningGainDb = 3.0;  // per additional transmission
inline constexpr double kBlerLogisticSlope = 2.0;    // per dB

/**
 * Spectral-efficiency ladder, 28 entries, geometric from 0.23 to 7.40
 * bit/symbol (step ratio (7.40/0.23)^(1/27) ~= 1.1372).
 */
inline constexpr double kMcsSpectralEfficiency[kNumMcs] = {
    0.230000000000, 0.261553968094, 0.297436861850, 0.338242571627,
    0.384646464293, 0.437416561083, 0.497426248962, 0.565668735869,
    0.643273489101, 0.731524928886, 0.831883686564, 0.946010779188,
    1.075795100678, 1.223384684514, 1.391222255390, 1.582085658251,
    1.799133833825, 2.045959101603, 2.326646615573, 2.645841976761,
    3.008828121612, 3.421612758782, 3.891027801476, 4.424842441040,
    5.031891733234, 5.722222825415, 6.507261244799, 7.400000000000,
};

/**
 * Decoding threshold per MCS: 10*log10(2^SE - 1) + 1 dB implementation
 * margin. A transmission at effective SINR equal to the threshold fails
 * with probability 0.5.
 */
inline constexpr double kMcsSinrThresholdDb[kNumMcs] = {
    -6.623684335942, -6.016508269809, -5.402421577519, -4.780414732533,
    -4.149321781806, -3.507793688323, -2.854266532412, -2.186923457804,
    -1.503648993162, -0.801974070780, -0.079009695715, 0.668633211121,
    1.444940756812,  2.254613285795,  3.103206837062,  3.997303233996,
    4.944713346280,  5.954717745223,  7.038347869564,  8.208708547565,
    9.481338924530,  10.874603399611, 12.410097572318, 14.113048053702,
    16.012682456341, 18.142551360884, 20.540801570020, 23.250429687287,
};

inline bool valid_mcs(int mcs) { return mcs >= 0 && mcs < kNumMcs; }

inline double mcs_se(int mcs) {
  if (!valid_mcs(mcs)) throw std::invalid_argument("mcs_se: mcs out of range");
  return kMcsSpectralEfficiency[mcs];
}

inline double mcs_threshold_db(int mcs) {
  if (!valid_mcs(mcs)) throw std::invalid_argument("mcs_threshold_db: mcs out of range");
  return kMcsSinrThresholdDb[mcs];
}

// Transport block size in bits for one TTI.
inline int64_t transport_block_size(int mcs, int rank, int prbs) {
  if (!valid_mcs(mcs)) throw std::invalid_argument("transport_block_size: mcs out of range");
  if (rank < 1 || rank > kMaxRank) throw std::invalid_argument("transport_block_size: rank out of range");
  if (prbs < 1) throw std::invalid_argument("transport_block_size: prbs must be >= 1");
  double bits = kMcsSpectralEfficiency[mcs] * static_cast<double>(prbs) *
                kSymbolsPerPrbTti * kDataRatio * rank;
  return static_cast<int64_t>(bits);
}

// First-transmission error probability of the logistic SINR-to-BLER map.
inline double block_error_probability(double sinr_eff_db, int mcs) {
  if (!valid_mcs(mcs)) throw std::invalid_argument("block_error_probability: mcs out of range");
  double x = kBlerLogisticSlope * (sinr_eff_db - kMcsSinrThresholdDb[mcs]);
  return 1.0 / (1.0 + std::exp(x));
}

// Effective SINR after HARQ chase combining, tx_count in 1..5.
inline double harq_effective_sinr_db(double sinr_db, int tx_count) {
  if (tx_count < 1 || tx_count > kMaxHarqTx)
    throw std::invalid_argument("harq_effective_sinr_db: tx_count out of range");
  return sinr_db + kHarqCombiningGainDb * (tx_count - 1);
}

// SU-MIMO spatial multiplexing: each layer gets an equal power share and
// suffers residual inter-layer interference, abstracted as a flat per-
// extra-layer penalty.
inline constexpr double kLayerPenaltyDb = 3.0;

inline double per_layer_sinr_db(double sinr_db, int rank) {
  if (rank < 1 || rank > kMaxRank)
    throw std::invalid_argument("per_layer_sinr_db: rank out of range");
  return sinr_db - 10.0 * std::log10(static_cast<double>(rank)) -
         kLayerPenaltyDb * (rank - 1);
}

}  // namespace ranla
