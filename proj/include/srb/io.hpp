#pragma once

#include <string>
#include <vector>

#include "srb/mcmc.hpp"
#include "srb/projection.hpp"
#include "srb/types.hpp"
#include "srb/validation.hpp"

namespace srb::io {

std::vector<SrbObservation> read_observations(const std::string& path);
void write_observations(const std::string& path,
                        const std::vector<SrbObservation>& observations);

void write_estimates(const std::string& path,
                     const std::vector<IntervalRow>& rows);

void write_projection(const std::string& path,
                      const std::vector<ProjectionRow>& rows);

/// Columnar draws store: header chain,draw,parameter,value with one row per
/// retained draw per scalar parameter.
void write_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(const std::string& path);

/// SHA-256 hex digest of a file's bytes.
std::string sha256_file(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Fixed-format decimal rendering used for all CSV artifacts so identical
/// runs produce identical bytes.
std::string format_double(double v);

}  // namespace srb::io
