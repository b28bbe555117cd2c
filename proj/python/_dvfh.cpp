// Python bindings. Model configs and shift tables cross the boundary as JSON
// text; rationals as "p/q" strings.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "dvfh/analysis.hpp"
#include "dvfh/codec.hpp"
#include "dvfh/shift.hpp"

namespace py = pybind11;
using namespace dvfh;

namespace {

struct PyModel {
  ModelConfig config;
  ModelPtr model;
  std::string digest;
};

PyModel load_model(const std::string& config_json, int n) {
  PyModel m{parse_model_config(nlohmann::json::parse(config_json)), nullptr, {}};
  m.model = make_model(m.config, n);
  const auto d = model_digest(m.config);
  m.digest = to_hex(d);
  return m;
}

ShiftTable table_from(const std::vector<std::string>& shifts) {
  ShiftTable t;
  for (const auto& s : shifts) t.s.push_back(parse_rational(s));
  return parse_shift_table(to_json(t));  // validates range and length
}

Variant variant_from(const std::optional<std::vector<std::string>>& shifts) {
  return shifts ? Variant::shifted(table_from(*shifts)) : Variant::standard();
}

std::vector<std::string> strings(const std::vector<Rational>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) out.push_back(to_string(v));
  return out;
}

}  // namespace

PYBIND11_MODULE(_dvfh, mod) {
  mod.doc() = "Delayed variable-to-fixed homophonic coding";

  py::register_exception<ModelError>(mod, "ModelError", PyExc_ValueError);
  py::register_exception<DisconnectedIntersection>(mod, "DisconnectedIntersection");
  py::register_exception<TruncatedStream>(mod, "TruncatedStream");
  py::register_exception<EnumerationCapExceeded>(mod, "EnumerationCapExceeded");

  py::class_<PyModel>(mod, "Model")
      .def(py::init(&load_model), py::arg("config_json"), py::arg("n"))
      .def_property_readonly("alphabet_size", [](const PyModel& m) { return m.model->alphabet_size(); })
      .def_property_readonly("block_length", [](const PyModel& m) { return m.model->block_length(); })
      .def_property_readonly("digest", [](const PyModel& m) { return m.digest; })
      .def_property_readonly("canonical", [](const PyModel& m) { return canonical_string(m.config); })
      .def_property_readonly("p_max", [](const PyModel& m) { return to_string(m.model->p_max()); })
      .def("cond_entropy", [](const PyModel& m, int x1) { return m.model->cond_entropy(x1); })
      .def("block_probability", [](const PyModel& m, const Sequence& block) {
        return to_string(m.model->block_probability(block));
      });

  mod.def(
      "compute_shift_table",
      [](const PyModel& m, const std::string& mode, std::uint64_t cap, std::uint64_t samples, std::uint64_t seed) {
        const ShiftMode sm = mode == "exact" ? ShiftMode::Exact : ShiftMode::Approximate;
        if (mode != "exact" && mode != "approx") throw std::invalid_argument("mode must be exact or approx");
        return strings(compute_shift_table(*m.model, sm, cap, samples, seed).s);
      },
      py::arg("model"), py::arg("mode") = "exact", py::arg("cap") = kDefaultEnumerationCap,
      py::arg("samples") = 100'000, py::arg("seed") = 1);

  mod.def(
      "encode",
      [](const PyModel& m, const Bits& bits, const std::optional<std::vector<std::string>>& shift,
         std::uint64_t budget) {
        for (auto b : bits) {
          if (b > 1) throw std::invalid_argument("bits must be 0 or 1");
        }
        const auto enc = encode_message(*m.model, bits, variant_from(shift), budget);
        return py::make_tuple(enc.blocks, enc.data_bits);
      },
      py::arg("model"), py::arg("bits"), py::arg("shift") = py::none(), py::arg("block_budget") = 1'000'000);

  mod.def(
      "decode",
      [](const PyModel& m, const std::vector<Sequence>& blocks, std::uint64_t length,
         const std::optional<std::vector<std::string>>& shift) {
        return decode_message(*m.model, blocks, length, variant_from(shift));
      },
      py::arg("model"), py::arg("blocks"), py::arg("length"), py::arg("shift") = py::none());

  mod.def("bounds", [](const PyModel& m, int k_max) {
    py::dict out;
    out["bound_std"] = divergence_bound_standard(m.model->first_symbol_dist());
    out["bound_mod"] = divergence_bound_modified(m.model->first_symbol_dist());
    out["p_max"] = to_string(m.model->p_max());
    out["rate_threshold"] = rate_threshold(*m.model);
    py::list prop;
    for (int k = 1; k <= k_max; ++k) {
      const auto b = error_prop_bound(m.model->p_max(), k);
      py::dict row;
      row["k"] = k;
      row["bound"] = b.value;
      row["vacuous"] = b.vacuous;
      prop.append(row);
    }
    out["error_prop"] = prop;
    return out;
  }, py::arg("model"), py::arg("k_max") = 5);

  mod.def(
      "measure_redundancy",
      [](const PyModel& m, const std::optional<std::vector<std::string>>& shift, std::uint64_t blocks,
         std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto r = measure_redundancy(*m.model, m.digest, variant_from(shift), blocks, seed);
        py::gil_scoped_acquire acquire;
        py::dict out;
        out["mean_l1"] = r.mean_l1;
        out["h_per_symbol"] = r.h_per_symbol;
        out["redundancy"] = r.redundancy;
        out["stderr"] = r.stderr_;
        return out;
      },
      py::arg("model"), py::arg("shift") = py::none(), py::arg("blocks") = 10'000, py::arg("seed") = 1);

  mod.def(
      "awgn_ask4",
      [](double snr_db, double inner, double outer, const std::string& convention) {
        if (convention != "average-power" && convention != "fixed-amplitude") {
          throw std::invalid_argument("convention must be average-power or fixed-amplitude");
        }
        return awgn_ask4_mutual_information(snr_db, inner, outer,
                                            convention == "average-power" ? SnrConvention::AveragePower
                                                                          : SnrConvention::FixedAmplitude);
      },
      py::arg("snr_db"), py::arg("inner"), py::arg("outer"), py::arg("convention") = "average-power");
}
