// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <armadillo>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "irsce/channel_model.hpp"

namespace irsce {

// Binary tensor container (all integers little-endian):
//
//   offset  size  field
//   0       8     magic "IRSCTNSR"
//   8       2     version (1)
//   10      1     byte order of the payload, '<' (little-endian)
//   11      1     complex layout, 1 = interleaved real/imag
//   12      1     dtype width in bytes (4 = float32, 8 = float64)
//   13      1     rank r
//   14      2     reserved, zero
//   16      8r    dimensions, outermost first
//   16+8r   8     payload byte count = prod(dims) * 2 * width
//   24+8r   ...   payload, row-major, re/im interleaved
//
// Structured metadata travels in a JSON sidecar at "<tensor path>.json".

inline constexpr char kTensorMagic[8] = {'I', 'R', 'S', 'C', 'T', 'N', 'S', 'R'};
inline constexpr std::uint16_t kTensorVersion = 1;

enum class Dtype : std::uint8_t {
    float32 = 4,
    float64 = 8,
};

struct TensorHeader {
    std::uint16_t version = kTensorVersion;
    Dtype dtype = Dtype::float64;
    std::vector<std::uint64_t> shape;
    std::uint64_t payload_bytes = 0;

    std::uint64_t element_count() const;
    std::uint64_t header_bytes() const { return 24 + 8 * shape.size(); }
};

/// Row-major complex tensor.
struct ComplexTensor {
    std::vector<std::uint64_t> shape;
    std::vector<std::complex<double>> values;

    std::uint64_t element_count() const;
};

ComplexTensor to_tensor(const arma::cx_mat& m);
arma::cx_mat to_matrix(const ComplexTensor& t);
/// Shape [K, N_IRS, N_UE].
ComplexTensor to_tensor(const FrequencyChannel& h);
FrequencyChannel to_channel(const ComplexTensor& t);

void write_tensor(const std::filesystem::path& path, const ComplexTensor& tensor, Dtype dtype = Dtype::float64);
ComplexTensor read_tensor(const std::filesystem::path& path);
/// Reads and validates the header; leaves the stream at the payload.
TensorHeader read_header(std::istream& in, const std::string& context);

std::filesystem::path metadata_path(const std::filesystem::path& tensor_path);
void write_metadata(const std::filesystem::path& tensor_path, const nlohmann::json& meta);
nlohmann::json read_metadata(const std::filesystem::path& tensor_path);

/// Writes a container whose payload is appended incrementally. The header
/// is written up front; close() checks that exactly the declared number of
/// elements arrived.
class TensorStreamWriter {
public:
    TensorStreamWriter(const std::filesystem::path& path, std::vector<std::uint64_t> shape,
                       Dtype dtype = Dtype::float64);
    ~TensorStreamWriter();
    TensorStreamWriter(const TensorStreamWriter&) = delete;
    TensorStreamWriter& operator=(const TensorStreamWriter&) = delete;

    /// Appends the matrix row-major.
    void append(const arma::cx_mat& m);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    Dtype dtype_;
    std::uint64_t expected_ = 0;
    std::uint64_t written_ = 0;
};

/// Noisy estimate and its clean target on the same angular-delay grid.
struct SamplePair {
    arma::cx_mat noisy;
    arma::cx_mat clean;
    nlohmann::json metadata;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Streams sample pairs from an exported dataset directory, one chunk file
/// open at a time.
class DatasetReader {
public:
    explicit DatasetReader(std::filesystem::path dir);

    std::uint64_t size() const { return count_; }
    arma::uword rows() const { return rows_; }
    arma::uword cols() const { return cols_; }
    const nlohmann::json& manifest() const { return manifest_; }

    /// Next pair, or nullopt past the end.
    std::optional<SamplePair> next();

private:
    void open_chunk(std::size_t index);

    std::filesystem::path dir_;
    nlohmann::json manifest_;
    std::uint64_t count_ = 0;
    arma::uword rows_ = 0;
    arma::uword cols_ = 0;
    std::size_t chunk_ = 0;
    std::uint64_t in_chunk_ = 0;
    std::uint64_t chunk_len_ = 0;
    Dtype dtype_ = Dtype::float64;
    nlohmann::json chunk_meta_;
    std::ifstream stream_;
};

DatasetReader import_dataset(const std::filesystem::path& dir);

} // namespace irsce
