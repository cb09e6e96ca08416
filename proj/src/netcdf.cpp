#include "gridsr/netcdf.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace gridsr::netcdf {

namespace {

constexpr std::uint32_t kTagDimension = 0x0A;
constexpr std::uint32_t kTagVariable = 0x0B;
constexpr std::uint32_t kTagAttribute = 0x0C;

i64 type_size(NcType t) {
    switch (t) {
        case NcType::Byte:
        case NcType::Char: return 1;
        case NcType::Short: return 2;
        case NcType::Int:
        case NcType::Float: return 4;
        case NcType::Double: return 8;
    }
    throw IngestError("netcdf: unknown type");
}

i64 pad4(i64 n) { return (n + 3) & ~i64{3}; }

//----------------------------------------------------------------------------
// Big-endian byte cursor
//----------------------------------------------------------------------------

class Reader {
public:
    explicit Reader(std::vector<unsigned char> bytes) : b_(std::move(bytes)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = (std::uint32_t(b_[p_]) << 24) | (std::uint32_t(b_[p_ + 1]) << 16) |
                          (std::uint32_t(b_[p_ + 2]) << 8) | std::uint32_t(b_[p_ + 3]);
        p_ += 4;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    std::string name() {
        const std::uint32_t len = u32();
        need(pad4(len));
        std::string s(reinterpret_cast<const char*>(&b_[p_]), len);
        p_ += pad4(len);
        return s;
    }
    void raw(void* dst, i64 n) {
        need(n);
        std::memcpy(dst, &b_[p_], static_cast<std::size_t>(n));
        p_ += n;
    }
    void seek(i64 pos) {
        if (pos < 0 || pos > static_cast<i64>(b_.size()))
            throw IngestError("netcdf: offset outside file");
        p_ = pos;
    }
    void skip(i64 n) { seek(p_ + n); }
    i64 pos() const { return p_; }

private:
    void need(i64 n) {
        if (p_ + n > static_cast<i64>(b_.size())) throw IngestError("netcdf: truncated file");
    }
    std::vector<unsigned char> b_;
    i64 p_ = 0;
};

class Writer {
public:
    void u32(std::uint32_t v) {
        b_.push_back(static_cast<unsigned char>(v >> 24));
        b_.push_back(static_cast<unsigned char>(v >> 16));
        b_.push_back(static_cast<unsigned char>(v >> 8));
        b_.push_back(static_cast<unsigned char>(v));
    }
    void u64(std::uint64_t v) {
        u32(static_cast<std::uint32_t>(v >> 32));
        u32(static_cast<std::uint32_t>(v));
    }
    void name(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        for (char c : s) b_.push_back(static_cast<unsigned char>(c));
        while (b_.size() % 4 != 0) b_.push_back(0);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void pad_to4() {
        while (b_.size() % 4 != 0) b_.push_back(0);
    }
    std::size_t size() const { return b_.size(); }
    const std::vector<unsigned char>& bytes() const { return b_; }

private:
    std::vector<unsigned char> b_;
};

double decode_value(Reader& r, NcType t) {
    switch (t) {
        case NcType::Byte: {
            unsigned char c;
            r.raw(&c, 1);
            return static_cast<double>(static_cast<signed char>(c));
        }
        case NcType::Char: {
            unsigned char c;
            r.raw(&c, 1);
            return static_cast<double>(c);
        }
        case NcType::Short: {
            unsigned char b[2];
            r.raw(b, 2);
            return static_cast<double>(static_cast<std::int16_t>((b[0] << 8) | b[1]));
        }
        case NcType::Int: {
            unsigned char b[4];
            r.raw(b, 4);
            const std::uint32_t u = (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
                                    (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
            return static_cast<double>(static_cast<std::int32_t>(u));
        }
        case NcType::Float: {
            unsigned char b[4];
            r.raw(b, 4);
            const std::uint32_t u = (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
                                    (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
            float f;
            std::memcpy(&f, &u, 4);
            return static_cast<double>(f);
        }
        case NcType::Double: {
            unsigned char b[8];
            r.raw(b, 8);
            std::uint64_t u = 0;
            for (int i = 0; i < 8; ++i) u = (u << 8) | b[i];
            double d;
            std::memcpy(&d, &u, 8);
            return d;
        }
    }
    throw IngestError("netcdf: unknown type in data");
}

std::vector<Attribute> read_att_list(Reader& r) {
    const std::uint32_t tag = r.u32();
    const std::uint32_t count = r.u32();
    if (tag == 0 && count == 0) return {};
    if (tag != kTagAttribute) throw IngestError("netcdf: malformed attribute list");
    std::vector<Attribute> atts;
    atts.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Attribute a;
        a.name = r.name();
        const auto type = static_cast<NcType>(r.u32());
        const std::uint32_t n = r.u32();
        if (type == NcType::Char) {
            std::string s(n, '\0');
            r.raw(s.data(), n);
            r.skip(pad4(n) - n);
            a.text = std::move(s);
            a.is_text = true;
        } else {
            a.is_text = false;
            a.numbers.reserve(n);
            const i64 start = r.pos();
            for (std::uint32_t k = 0; k < n; ++k) a.numbers.push_back(decode_value(r, type));
            r.skip(pad4(r.pos() - start) - (r.pos() - start));
        }
        atts.push_back(std::move(a));
    }
    return atts;
}

} // namespace

const Attribute* Variable::find_att(const std::string& n) const {
    for (const auto& a : atts)
        if (a.name == n) return &a;
    return nullptr;
}

i64 NcFile::dim_length(const std::string& name) const {
    for (const auto& [n, len] : dims)
        if (n == name) return len;
    throw IngestError("netcdf: unknown dimension '" + name + "'");
}

const Variable* NcFile::find_var(const std::string& name) const {
    for (const auto& v : vars)
        if (v.name == name) return &v;
    return nullptr;
}

Variable* NcFile::find_var(const std::string& name) {
    for (auto& v : vars)
        if (v.name == name) return &v;
    return nullptr;
}

void NcFile::add_dim(const std::string& name, i64 len) {
    for (const auto& [n, l] : dims)
        if (n == name) {
            if (l != len) throw ConfigError("netcdf: dimension '" + name + "' redefined");
            return;
        }
    dims.emplace_back(name, len);
}

NcFile read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("netcdf: cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    Reader r(std::move(bytes));

    char magic[3];
    r.raw(magic, 3);
    unsigned char version;
    r.raw(&version, 1);
    if (std::memcmp(magic, "CDF", 3) != 0 || (version != 1 && version != 2))
        throw IngestError("netcdf: '" + path + "' is not a classic NetCDF file (CDF-1/CDF-2)");
    const bool wide = version == 2;

    const std::uint32_t numrecs = r.u32();
    if (numrecs != 0)
        throw IngestError("netcdf: record (unlimited) dimensions are not supported: " + path);

    NcFile file;

    const std::uint32_t dim_tag = r.u32();
    const std::uint32_t dim_count = r.u32();
    if (dim_tag == kTagDimension) {
        for (std::uint32_t i = 0; i < dim_count; ++i) {
            std::string name = r.name();
            const std::uint32_t len = r.u32();
            if (len == 0)
                throw IngestError("netcdf: record (unlimited) dimensions are not supported: " + path);
            file.dims.emplace_back(std::move(name), len);
        }
    } else if (!(dim_tag == 0 && dim_count == 0)) {
        throw IngestError("netcdf: malformed dimension list");
    }

    file.global_atts = read_att_list(r);

    const std::uint32_t var_tag = r.u32();
    const std::uint32_t var_count = r.u32();
    struct PendingVar {
        Variable v;
        i64 begin;
        i64 count;
    };
    std::vector<PendingVar> pending;
    if (var_tag == kTagVariable) {
        for (std::uint32_t i = 0; i < var_count; ++i) {
            PendingVar pv;
            pv.v.name = r.name();
            const std::uint32_t rank = r.u32();
            i64 count = 1;
            for (std::uint32_t d = 0; d < rank; ++d) {
                const std::uint32_t dimid = r.u32();
                if (dimid >= file.dims.size()) throw IngestError("netcdf: bad dimension id");
                pv.v.dims.push_back(file.dims[dimid].first);
                count *= file.dims[dimid].second;
            }
            pv.v.atts = read_att_list(r);
            pv.v.type = static_cast<NcType>(r.u32());
            r.u32(); // vsize (recomputed below)
            pv.begin = wide ? static_cast<i64>(r.u64()) : static_cast<i64>(r.u32());
            pv.count = count;
            pending.push_back(std::move(pv));
        }
    } else if (!(var_tag == 0 && var_count == 0)) {
        throw IngestError("netcdf: malformed variable list");
    }

    for (auto& pv : pending) {
        r.seek(pv.begin);
        pv.v.data.reserve(pv.count);
        for (i64 k = 0; k < pv.count; ++k) pv.v.data.push_back(decode_value(r, pv.v.type));
        // CF packing and fill values
        const Attribute* fill = pv.v.find_att("_FillValue");
        if (fill && !fill->is_text && !fill->numbers.empty()) {
            const double fv = fill->numbers[0];
            for (double& d : pv.v.data)
                if (d == fv) d = std::numeric_limits<double>::quiet_NaN();
        }
        const Attribute* sf = pv.v.find_att("scale_factor");
        const Attribute* ao = pv.v.find_att("add_offset");
        const double scale = (sf && !sf->is_text && !sf->numbers.empty()) ? sf->numbers[0] : 1.0;
        const double offset = (ao && !ao->is_text && !ao->numbers.empty()) ? ao->numbers[0] : 0.0;
        if (scale != 1.0 || offset != 0.0)
            for (double& d : pv.v.data) d = d * scale + offset;
        file.vars.push_back(std::move(pv.v));
    }
    return file;
}

void write_file(const std::string& path, const NcFile& file) {
    for (const auto& v : file.vars) {
        if (v.type != NcType::Double)
            throw ConfigError("netcdf: writer emits Double variables only");
        i64 count = 1;
        for (const auto& d : v.dims) count *= file.dim_length(d);
        if (count != static_cast<i64>(v.data.size()))
            throw ShapeError("netcdf: variable '" + v.name + "' data does not match its dimensions");
    }

    // Two passes: the header size depends on itself only through fixed-width
    // fields, so build the header once with dummy offsets, then patch.
    auto build_header = [&](const std::vector<i64>& begins) {
        Writer w;
        w.u32(0x43444602); // "CDF" + version 2
        w.u32(0);          // numrecs
        if (file.dims.empty()) {
            w.u32(0);
            w.u32(0);
        } else {
            w.u32(kTagDimension);
            w.u32(static_cast<std::uint32_t>(file.dims.size()));
            for (const auto& [n, len] : file.dims) {
                w.name(n);
                w.u32(static_cast<std::uint32_t>(len));
            }
        }
        auto atts_out = [&w](const std::vector<Attribute>& atts) {
            if (atts.empty()) {
                w.u32(0);
                w.u32(0);
                return;
            }
            w.u32(kTagAttribute);
            w.u32(static_cast<std::uint32_t>(atts.size()));
            for (const auto& a : atts) {
                w.name(a.name);
                if (a.is_text) {
                    w.u32(static_cast<std::uint32_t>(NcType::Char));
                    w.name(a.text); // same wire layout: length + padded bytes
                } else {
                    w.u32(static_cast<std::uint32_t>(NcType::Double));
                    w.u32(static_cast<std::uint32_t>(a.numbers.size()));
                    for (double d : a.numbers) w.f64(d);
                }
            }
        };
        atts_out(file.global_atts);
        if (file.vars.empty()) {
            w.u32(0);
            w.u32(0);
        } else {
            w.u32(kTagVariable);
            w.u32(static_cast<std::uint32_t>(file.vars.size()));
            for (std::size_t vi = 0; vi < file.vars.size(); ++vi) {
                const Variable& v = file.vars[vi];
                w.name(v.name);
                w.u32(static_cast<std::uint32_t>(v.dims.size()));
                for (const auto& dn : v.dims) {
                    std::uint32_t id = 0;
                    for (; id < file.dims.size(); ++id)
                        if (file.dims[id].first == dn) break;
                    if (id == file.dims.size())
                        throw ConfigError("netcdf: variable '" + v.name + "' uses unknown dimension '" +
                                          dn + "'");
                    w.u32(id);
                }
                atts_out(v.atts);
                w.u32(static_cast<std::uint32_t>(v.type));
                const i64 vsize = pad4(static_cast<i64>(v.data.size()) * type_size(v.type));
                w.u32(static_cast<std::uint32_t>(std::min<i64>(vsize, 0xFFFFFFFF)));
                w.u64(static_cast<std::uint64_t>(begins[vi]));
            }
        }
        return w;
    };

    std::vector<i64> begins(file.vars.size(), 0);
    const i64 header_size = static_cast<i64>(build_header(begins).size());
    i64 offset = pad4(header_size);
    for (std::size_t vi = 0; vi < file.vars.size(); ++vi) {
        begins[vi] = offset;
        offset += pad4(static_cast<i64>(file.vars[vi].data.size()) * 8);
    }

    Writer header = build_header(begins);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("netcdf: cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(header.bytes().data()),
              static_cast<std::streamsize>(header.size()));
    for (i64 k = header_size; k < pad4(header_size); ++k) out.put(0);
    for (const auto& v : file.vars) {
        Writer w;
        for (double d : v.data) w.f64(d);
        w.pad_to4();
        out.write(reinterpret_cast<const char*>(w.bytes().data()),
                  static_cast<std::streamsize>(w.size()));
    }
    if (!out) throw IngestError("netcdf: short write to '" + path + "'");
}

} // namespace gridsr::netcdf
