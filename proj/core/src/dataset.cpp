// SPDX-License-Identifier: Apache-2.0
#include "irsce/dataset.hpp"

#include <bit>
#include <cstring>
#include <functional>
#include <numeric>
#include <string>

#include "irsce/errors.hpp"

namespace irsce {
namespace {

template <typename T>
void put_le(std::vector<char>& buf, T value)
{
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const unsigned char* p)
{
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        u |= static_cast<std::make_unsigned_t<T>>(p[i]) << (8 * i);
    return static_cast<T>(u);
}

void put_real(std::vector<char>& buf, double v, Dtype dtype)
{
    if (dtype == Dtype::float64)
        put_le(buf, std::bit_cast<std::uint64_t>(v));
    else
        put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

std::uint64_t product(const std::vector<std::uint64_t>& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::uint64_t{1}, std::multiplies<>());
}

std::vector<std::complex<double>> read_values(std::istream& in, Dtype dtype, std::uint64_t count,
                                              const std::string& context)
{
    const std::size_t width = static_cast<std::size_t>(dtype);
    std::vector<unsigned char> raw(count * 2 * width);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw FormatError(context + ": payload truncated");

    std::vector<std::complex<double>> out(count);
    const unsigned char* p = raw.data();
    for (std::uint64_t i = 0; i < count; ++i) {
        double re, im;
        if (dtype == Dtype::float64) {
            re = std::bit_cast<double>(get_le<std::uint64_t>(p));
            im = std::bit_cast<double>(get_le<std::uint64_t>(p + 8));
        } else {
            re = std::bit_cast<float>(get_le<std::uint32_t>(p));
            im = std::bit_cast<float>(get_le<std::uint32_t>(p + 4));
        }
        out[i] = {re, im};
        p += 2 * width;
    }
    return out;
}

} // namespace

std::uint64_t TensorHeader::element_count() const { return product(shape); }
std::uint64_t ComplexTensor::element_count() const { return product(shape); }

ComplexTensor to_tensor(const arma::cx_mat& m)
{
    ComplexTensor t;
    t.shape = {m.n_rows, m.n_cols};
    t.values.reserve(m.n_elem);
    for (arma::uword r = 0; r < m.n_rows; ++r)
        for (arma::uword c = 0; c < m.n_cols; ++c)
            t.values.push_back(m(r, c));
    return t;
}

arma::cx_mat to_matrix(const ComplexTensor& t)
{
    // Leading unit dimensions are accepted so [1, R, K] reads as R x K.
    std::vector<std::uint64_t> dims = t.shape;
    while (dims.size() > 2 && dims.front() == 1)
        dims.erase(dims.begin());
    if (dims.size() != 2)
        throw ShapeError("to_matrix: tensor is not two-dimensional");
    arma::cx_mat m(dims[0], dims[1]);
    std::size_t i = 0;
    for (arma::uword r = 0; r < m.n_rows; ++r)
        for (arma::uword c = 0; c < m.n_cols; ++c)
            m(r, c) = t.values[i++];
    return m;
}

ComplexTensor to_tensor(const FrequencyChannel& h)
{
    ComplexTensor t;
    t.shape = {h.n_subcarriers(), h.n_rows(), h.n_cols()};
    t.values.reserve(h.subchannels.n_elem);
    for (arma::uword k = 0; k < h.n_subcarriers(); ++k)
        for (arma::uword r = 0; r < h.n_rows(); ++r)
            for (arma::uword c = 0; c < h.n_cols(); ++c)
                t.values.push_back(h.subchannels(r, c, k));
    return t;
}

FrequencyChannel to_channel(const ComplexTensor& t)
{
    if (t.shape.size() != 3)
        throw ShapeError("to_channel: expected shape [K, N_IRS, N_UE]");
    FrequencyChannel h;
    h.subchannels.set_size(t.shape[1], t.shape[2], t.shape[0]);
    std::size_t i = 0;
    for (arma::uword k = 0; k < h.n_subcarriers(); ++k)
        for (arma::uword r = 0; r < h.n_rows(); ++r)
            for (arma::uword c = 0; c < h.n_cols(); ++c)
                h.subchannels(r, c, k) = t.values[i++];
    return h;
}

namespace {

std::vector<char> encode_header(const std::vector<std::uint64_t>& shape, Dtype dtype)
{
    if (shape.size() > 255)
        throw ShapeError("write_tensor: rank exceeds 255");
    const std::size_t width = static_cast<std::size_t>(dtype);
    std::vector<char> buf;
    buf.insert(buf.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
    put_le(buf, kTensorVersion);
    buf.push_back('<');
    buf.push_back(1);
    buf.push_back(static_cast<char>(width));
    buf.push_back(static_cast<char>(shape.size()));
    put_le(buf, std::uint16_t{0});
    for (std::uint64_t d : shape)
        put_le(buf, d);
    put_le(buf, static_cast<std::uint64_t>(product(shape) * 2 * width));
    return buf;
}

} // namespace

TensorStreamWriter::TensorStreamWriter(const std::filesystem::path& path, std::vector<std::uint64_t> shape,
                                       Dtype dtype)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), dtype_(dtype), expected_(product(shape))
{
    if (!out_)
        throw std::runtime_error("TensorStreamWriter: cannot open " + path.string() + " for writing");
    const auto header = encode_header(shape, dtype);
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

TensorStreamWriter::~TensorStreamWriter()
{
    if (out_.is_open())
        out_.close();
}

void TensorStreamWriter::append(const arma::cx_mat& m)
{
    if (written_ + m.n_elem > expected_)
        throw ShapeError("TensorStreamWriter: more values than declared for " + path_.string());
    std::vector<char> buf;
    buf.reserve(m.n_elem * 2 * static_cast<std::size_t>(dtype_));
    for (arma::uword r = 0; r < m.n_rows; ++r) {
        for (arma::uword c = 0; c < m.n_cols; ++c) {
            put_real(buf, m(r, c).real(), dtype_);
            put_real(buf, m(r, c).imag(), dtype_);
        }
    }
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out_)
        throw std::runtime_error("TensorStreamWriter: write failed for " + path_.string());
    written_ += m.n_elem;
}

void TensorStreamWriter::close()
{
    if (written_ != expected_)
        throw ShapeError("TensorStreamWriter: " + path_.string() + " closed with " + std::to_string(written_) +
                         " of " + std::to_string(expected_) + " values");
    out_.close();
    if (!out_)
        throw std::runtime_error("TensorStreamWriter: close failed for " + path_.string());
}

void write_tensor(const std::filesystem::path& path, const ComplexTensor& tensor, Dtype dtype)
{
    if (tensor.values.size() != tensor.element_count())
        throw ShapeError("write_tensor: value count does not match shape for " + path.string());
    std::vector<char> buf = encode_header(tensor.shape, dtype);
    buf.reserve(buf.size() + tensor.values.size() * 2 * static_cast<std::size_t>(dtype));
    for (const auto& z : tensor.values) {
        put_real(buf, z.real(), dtype);
        put_real(buf, z.imag(), dtype);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("write_tensor: cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw std::runtime_error("write_tensor: write failed for " + path.string());
}

TensorHeader read_header(std::istream& in, const std::string& context)
{
    unsigned char fixed[16];
    in.read(reinterpret_cast<char*>(fixed), sizeof fixed);
    if (in.gcount() != sizeof fixed)
        throw FormatError(context + ": header truncated");
    if (std::memcmp(fixed, kTensorMagic, sizeof kTensorMagic) != 0)
        throw FormatError(context + ": bad magic");

    TensorHeader h;
    h.version = get_le<std::uint16_t>(fixed + 8);
    if (h.version != kTensorVersion)
        throw FormatError(context + ": unsupported version " + std::to_string(h.version));
    if (fixed[10] != '<')
        throw FormatError(context + ": unsupported endianness marker");
    if (fixed[11] != 1)
        throw FormatError(context + ": complex layout is not interleaved");
    if (fixed[12] != 4 && fixed[12] != 8)
        throw FormatError(context + ": unsupported dtype width " + std::to_string(fixed[12]));
    h.dtype = static_cast<Dtype>(fixed[12]);
    const unsigned rank = fixed[13];

    std::vector<unsigned char> rest(8 * rank + 8);
    in.read(reinterpret_cast<char*>(rest.data()), static_cast<std::streamsize>(rest.size()));
    if (static_cast<std::size_t>(in.gcount()) != rest.size())
        throw FormatError(context + ": shape truncated");
    for (unsigned i = 0; i < rank; ++i)
        h.shape.push_back(get_le<std::uint64_t>(rest.data() + 8 * i));
    h.payload_bytes = get_le<std::uint64_t>(rest.data() + 8 * rank);
    if (h.payload_bytes != h.element_count() * 2 * static_cast<std::uint64_t>(h.dtype))
        throw FormatError(context + ": shape does not match payload byte count");
    return h;
}

ComplexTensor read_tensor(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_tensor: cannot open " + path.string());
    const TensorHeader h = read_header(in, path.string());
    ComplexTensor t;
    t.shape = h.shape;
    t.values = read_values(in, h.dtype, h.element_count(), path.string());
    if (in.peek() != std::ifstream::traits_type::eof())
        throw FormatError(path.string() + ": trailing bytes after payload");
    return t;
}

std::filesystem::path metadata_path(const std::filesystem::path& tensor_path)
{
    return std::filesystem::path(tensor_path.string() + ".json");
}

void write_metadata(const std::filesystem::path& tensor_path, const nlohmann::json& meta)
{
    const auto path = metadata_path(tensor_path);
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("write_metadata: cannot open " + path.string());
    out << meta.dump(2) << '\n';
}

nlohmann::json read_metadata(const std::filesystem::path& tensor_path)
{
    const auto path = metadata_path(tensor_path);
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_metadata: cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

DatasetReader::DatasetReader(std::filesystem::path dir) : dir_(std::move(dir))
{
    const auto manifest_path = dir_ / kManifestName;
    std::ifstream in(manifest_path);
    if (!in)
        throw std::runtime_error("import_dataset: cannot open " + manifest_path.string());
    try {
        manifest_ = nlohmann::json::parse(in);
        if (manifest_.at("format").get<std::string>() != "irsce-dataset")
            throw FormatError(manifest_path.string() + ": format field is not irsce-dataset");
        if (manifest_.at("version").get<int>() != kTensorVersion)
            throw FormatError(manifest_path.string() + ": unsupported version");
        count_ = manifest_.at("count").get<std::uint64_t>();
        rows_ = manifest_.at("rows").get<arma::uword>();
        cols_ = manifest_.at("cols").get<arma::uword>();
        if (manifest_.at("chunks").empty() && count_ > 0)
            throw FormatError(manifest_path.string() + ": chunks list is empty");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
}

void DatasetReader::open_chunk(std::size_t index)
{
    const auto path = dir_ / manifest_["chunks"][index].get<std::string>();
    stream_ = std::ifstream(path, std::ios::binary);
    if (!stream_)
        throw std::runtime_error("import_dataset: cannot open chunk " + path.string());
    const TensorHeader h = read_header(stream_, path.string());
    if (h.shape.size() != 4)
        throw FormatError(path.string() + ": shape rank is not 4");
    if (h.shape[1] != 2)
        throw FormatError(path.string() + ": shape[1] (pair axis) is not 2");
    if (h.shape[2] != rows_)
        throw FormatError(path.string() + ": shape[2] does not match manifest rows");
    if (h.shape[3] != cols_)
        throw FormatError(path.string() + ": shape[3] does not match manifest cols");
    dtype_ = h.dtype;
    chunk_len_ = h.shape[0];
    in_chunk_ = 0;
    chunk_meta_ = read_metadata(path);
}

std::optional<SamplePair> DatasetReader::next()
{
    const auto& chunks = manifest_["chunks"];
    while (!stream_.is_open() || in_chunk_ >= chunk_len_) {
        if (stream_.is_open())
            ++chunk_;
        if (chunk_ >= chunks.size())
            return std::nullopt;
        open_chunk(chunk_);
    }

    const std::uint64_t n = static_cast<std::uint64_t>(rows_) * cols_;
    const auto values = read_values(stream_, dtype_, 2 * n, (dir_ / chunks[chunk_].get<std::string>()).string());
    SamplePair pair;
    pair.noisy.set_size(rows_, cols_);
    pair.clean.set_size(rows_, cols_);
    for (arma::uword r = 0; r < rows_; ++r) {
        for (arma::uword c = 0; c < cols_; ++c) {
            pair.noisy(r, c) = values[r * cols_ + c];
            pair.clean(r, c) = values[n + r * cols_ + c];
        }
    }
    if (chunk_meta_.contains("samples") && in_chunk_ < chunk_meta_["samples"].size())
        pair.metadata = chunk_meta_["samples"][in_chunk_];
    ++in_chunk_;
    return pair;
}

DatasetReader import_dataset(const std::filesystem::path& dir)
{
    return DatasetReader(dir);
}

} // namespace irsce
