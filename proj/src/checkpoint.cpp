#include "aoi/checkpoint.hpp"

#include "aoi/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace aoi {

namespace {

constexpr std::string_view kMagic = "aoi-checkpoint";
constexpr int kVersion = 1;

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    std::string_view next()
    {
        if (pos_ >= text_.size()) {
            throw Error("checkpoint: unexpected end of file after line " + std::to_string(line_));
        }
        const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
        std::string_view line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_;
        return line;
    }

    std::size_t line() const { return line_; }
    bool at_end() const { return pos_ >= text_.size(); }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

std::string_view expect_key(LineReader& in, std::string_view key)
{
    const std::string_view line = in.next();
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
        throw Error("checkpoint line " + std::to_string(in.line()) + ": expected '" + std::string(key) + "'");
    }
    return line.substr(key.size() + 1);
}

std::uint64_t parse_uint(std::string_view s, const LineReader& in)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error("checkpoint line " + std::to_string(in.line()) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

std::string serialize_checkpoint(const NetParams& params, const CheckpointMeta& meta)
{
    const NetArch& a = params.arch();
    std::ostringstream out;
    out << kMagic << ' ' << kVersion << '\n'
        << "config_hash " << (meta.config_hash.empty() ? "-" : meta.config_hash) << '\n'
        << "seed " << meta.seed << '\n'
        << "n_sensors " << a.n_sensors << '\n'
        << "history_len " << a.history_len << '\n'
        << "conv_filters " << a.conv_filters << '\n'
        << "conv_kernel " << a.conv_kernel << '\n'
        << "conv_stride " << a.conv_stride << '\n'
        << "hidden_units " << a.hidden_units << '\n'
        << "params " << params.size() << '\n';
    char buf[64];
    for (double v : params.flat()) {
        const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
        out.write(buf, res.ptr - buf);
        out.put('\n');
    }
    return out.str();
}

Checkpoint parse_checkpoint(std::string_view text)
{
    LineReader in(text);
    const std::string_view version = expect_key(in, kMagic);
    if (parse_uint(version, in) != kVersion) {
        throw Error("checkpoint: unsupported version " + std::string(version));
    }
    Checkpoint ck;
    ck.meta.config_hash = std::string(expect_key(in, "config_hash"));
    if (ck.meta.config_hash == "-") {
        ck.meta.config_hash.clear();
    }
    ck.meta.seed = parse_uint(expect_key(in, "seed"), in);

    NetArch arch;
    arch.n_sensors = parse_uint(expect_key(in, "n_sensors"), in);
    arch.history_len = parse_uint(expect_key(in, "history_len"), in);
    arch.conv_filters = parse_uint(expect_key(in, "conv_filters"), in);
    arch.conv_kernel = parse_uint(expect_key(in, "conv_kernel"), in);
    arch.conv_stride = parse_uint(expect_key(in, "conv_stride"), in);
    arch.hidden_units = parse_uint(expect_key(in, "hidden_units"), in);
    ck.params = NetParams(arch);

    const std::uint64_t count = parse_uint(expect_key(in, "params"), in);
    if (count != ck.params.size()) {
        throw Error("checkpoint: " + std::to_string(count) + " parameters listed, architecture needs " +
                    std::to_string(ck.params.size()));
    }
    for (double& v : ck.params.flat()) {
        const std::string_view line = in.next();
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v, std::chars_format::hex);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            throw Error("checkpoint line " + std::to_string(in.line()) + ": bad value '" + std::string(line) + "'");
        }
    }
    if (!in.at_end()) {
        throw Error("checkpoint line " + std::to_string(in.line() + 1) + ": trailing data after the parameters");
    }
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const NetParams& params, const CheckpointMeta& meta)
{
    const std::string body = serialize_checkpoint(params, meta);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open " + tmp.string() + " for writing");
        }
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        out.flush();
        if (!out) {
            throw Error("write to " + tmp.string() + " failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open checkpoint " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str());
}

} // namespace aoi
