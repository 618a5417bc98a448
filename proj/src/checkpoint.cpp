#include "qnsp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "qnsp/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace qnsp {

namespace {

constexpr char kMagic[6] = {'Q', 'N', 'S', 'P', 'F', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::istream& is) {
  double v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

std::size_t expected_components(FieldRank r, int d) {
  switch (r) {
    case FieldRank::scalar: return 1;
    case FieldRank::vector: return static_cast<std::size_t>(d);
    case FieldRank::matrix: return static_cast<std::size_t>(d) * d;
  }
  throw Error("bad field rank");
}

}  // namespace

void save_checkpoint_field(const std::string& path, const CheckpointField& cf) {
  if (cf.fields.empty()) throw Error("checkpoint has no components");
  const Grid& g = cf.fields.front().grid();
  if (cf.fields.size() != expected_components(cf.rank, g.dim()))
    throw Error("checkpoint component count does not match its rank");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint '" + path + "'");
  os.write(kMagic, sizeof kMagic);
  put_u32(os, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_u32(os, static_cast<std::uint32_t>(g.n(a)));
  for (int a = 0; a < g.dim(); ++a) put_f64(os, g.length(a));
  put_u32(os, static_cast<std::uint32_t>(cf.rank));
  put_f64(os, cf.time);
  for (const auto& f : cf.fields)
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!os) throw Error("short write to checkpoint '" + path + "'");
}

CheckpointField load_checkpoint_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint '" + path + "'");
  char magic[6];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error("'" + path + "' is not a QNSPF1 checkpoint");
  const int d = static_cast<int>(get_u32(is));
  if (d < 1 || d > 3) throw Error("checkpoint dimension out of range");
  std::array<int, 3> n = {8, 8, 8};
  std::array<double, 3> len = {1, 1, 1};
  for (int a = 0; a < d; ++a) n[a] = static_cast<int>(get_u32(is));
  for (int a = 0; a < d; ++a) len[a] = get_f64(is);
  CheckpointField cf;
  cf.rank = static_cast<FieldRank>(get_u32(is));
  cf.time = get_f64(is);
  Grid g(d, n, len);
  const std::size_t nc = expected_components(cf.rank, d);
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> v(g.points());
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw Error("checkpoint '" + path + "' truncated");
    cf.fields.push_back(SpectralField::from_values(g, std::move(v)));
  }
  return cf;
}

void save_state(const std::string& prefix, const State& s) {
  save_checkpoint_field(prefix + ".rho.qnspf",
                        CheckpointField{FieldRank::scalar, s.t, {s.rho}});
  save_checkpoint_field(prefix + ".mom.qnspf",
                        CheckpointField{FieldRank::vector, s.t, s.mom.comp});
  save_checkpoint_field(prefix + ".V.qnspf",
                        CheckpointField{FieldRank::scalar, s.t, {s.V}});
}

State load_state(const std::string& prefix) {
  CheckpointField rho = load_checkpoint_field(prefix + ".rho.qnspf");
  CheckpointField mom = load_checkpoint_field(prefix + ".mom.qnspf");
  CheckpointField V = load_checkpoint_field(prefix + ".V.qnspf");
  if (rho.rank != FieldRank::scalar || mom.rank != FieldRank::vector ||
      V.rank != FieldRank::scalar)
    throw Error("state checkpoints have unexpected ranks");
  VectorField m;
  m.comp = mom.fields;
  return State{rho.time, rho.fields[0], std::move(m), V.fields[0]};
}

}  // namespace qnsp
