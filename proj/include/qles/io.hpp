#pragma once

// CSV and JSON artifacts. Reals are written with 17 significant digits;
// non-finite JSON numbers become null.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qles/fibering.hpp"
#include "qles/moser.hpp"
#include "qles/plap.hpp"
#include "qles/problems.hpp"
#include "qles/schaefer.hpp"
#include "qles/spectral.hpp"

namespace qles {

using Json = nlohmann::ordered_json;

/// `x,value` (1D) or `x,y,value` (2D), one row per node in index order.
void write_field_csv(const std::filesystem::path& path, const Field& f);
/// Reads a field written by write_field_csv onto `mesh`; coordinates must match.
Field read_field_csv(const std::filesystem::path& path, const MeshPtr& mesh);

void write_solve_trace_csv(const std::filesystem::path& path, const SolveTrace& t);
void write_iter_trace_csv(const std::filesystem::path& path, const IterTrace& t);
/// `k,delta_k,gamma_k,E_k,e_k`.
void write_moser_csv(const std::filesystem::path& path, const MoserLadder& L, const BoundReport& R);

/// Real number or null when not finite.
Json num(double v);

Json to_json(const EigenResult& r);
Json to_json(const Certificate& c);
Json to_json(const ViolationReport& r);
Json to_json(const BoundReport& r);
Json to_json(const NormWindow& w);
Json to_json(const MoserLadder& L);

void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace qles
