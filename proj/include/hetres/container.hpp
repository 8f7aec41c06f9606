#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetres/common.hpp"
#include "hetres/dynamics.hpp"
#include "hetres/stimgen.hpp"
#include "hetres/topology.hpp"

namespace hetres::io {

// Binary container: magic "HRSV", format version, object kind, a JSON meta
// blob, named little-endian row-major arrays, and a trailing 64-bit FNV-1a
// checksum over everything before it. Truncation, bit corruption, and
// unknown versions fail closed.

enum class Dtype : std::uint32_t { f16 = 0, f32 = 1, f64 = 2, u8 = 3, i64 = 4 };

enum class Kind : std::uint32_t {
    generic = 0,
    stimulus = 1,
    network = 2,
    state = 3,
    raster = 4,
};

struct NamedArray {
    std::string name;
    Dtype dtype = Dtype::f64;
    Index rows = 0;
    Index cols = 0;
    MatrixXd data;                     // used for f16/f32/f64
    std::vector<std::int64_t> idata;   // used for u8/i64, row-major

    bool is_float() const { return dtype <= Dtype::f64; }
};

struct Container {
    Kind kind = Kind::generic;
    std::string meta;  // JSON text
    std::vector<NamedArray> arrays;

    const NamedArray* find(const std::string& name) const;
    const NamedArray& get(const std::string& name) const;
};

constexpr std::uint32_t kFormatVersion = 1;

void save(const std::string& path, const Container& c);
Container load(const std::string& path);

// Typed wrappers, with the defining parameters echoed in the meta header.
void save_state(const std::string& path, const dyn::StateMatrix& x,
                Dtype dtype = Dtype::f64);
dyn::StateMatrix load_state(const std::string& path);

void save_stimulus(const std::string& path, const stim::Stimulus& s,
                   Dtype dtype = Dtype::f64);
stim::Stimulus load_stimulus(const std::string& path);

void save_network(const std::string& path, const topo::Network& n);
topo::Network load_network(const std::string& path);

void save_raster(const std::string& path, const dyn::SpikeRaster& r);
dyn::SpikeRaster load_raster(const std::string& path);

}  // namespace hetres::io
