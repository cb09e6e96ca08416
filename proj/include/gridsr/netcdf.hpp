#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridsr/common.hpp"

namespace gridsr::netcdf {

// Self-contained reader/writer for the NetCDF classic format (CDF-1/CDF-2,
// fixed dimensions). The writer emits CDF-2; the reader also accepts CDF-1
// and applies CF scale_factor/add_offset packing when present. Record
// (unlimited) dimensions and netCDF-4/HDF5 containers are not supported.

using i64 = std::int64_t;

enum class NcType : int {
    Byte = 1,
    Char = 2,
    Short = 3,
    Int = 4,
    Float = 5,
    Double = 6,
};

struct Attribute {
    std::string name;
    std::string text;            // for Char attributes
    std::vector<double> numbers; // for numeric attributes
    bool is_text = true;

    static Attribute str(std::string name, std::string value) {
        Attribute a;
        a.name = std::move(name);
        a.text = std::move(value);
        a.is_text = true;
        return a;
    }
    static Attribute num(std::string name, std::vector<double> values) {
        Attribute a;
        a.name = std::move(name);
        a.numbers = std::move(values);
        a.is_text = false;
        return a;
    }
};

struct Variable {
    std::string name;
    std::vector<std::string> dims;
    std::vector<Attribute> atts;
    NcType type = NcType::Double; // on-disk type; in-memory data is double
    std::vector<double> data;

    const Attribute* find_att(const std::string& n) const;
};

struct NcFile {
    std::vector<std::pair<std::string, i64>> dims;
    std::vector<Attribute> global_atts;
    std::vector<Variable> vars;

    i64 dim_length(const std::string& name) const;
    const Variable* find_var(const std::string& name) const;
    Variable* find_var(const std::string& name);
    void add_dim(const std::string& name, i64 len);
};

NcFile read_file(const std::string& path);
void write_file(const std::string& path, const NcFile& file);

} // namespace gridsr::netcdf
