#pragma once

#include <iosfwd>
#include <string>

#include "qdesign/spectro_fit.hpp"

namespace qdesign::fit {

// Header row with columns bias_mA, freq_GHz and optionally weight, m, in any
// order. Throws ParseError listing every bad line and DomainError when no
// data rows remain.
SpectroscopyDataset parse_csv(std::istream& in, const std::string& source = "<stream>");
SpectroscopyDataset ingest_csv(const std::string& path);

// Values are written with 17 significant digits, so a read returns the
// same doubles.
void write_csv(std::ostream& out, const SpectroscopyDataset& data);
void write_csv(const std::string& path, const SpectroscopyDataset& data);

}  // namespace qdesign::fit
