#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "wsr/netmodel.hpp"

namespace wsr {

// Plain-text network document, one per file:
//
//   format wsrnet 1
//   seed 42                                     (optional)
//   scenario links=10 tx=3 rx=4 alpha=1 ...     (optional)
//   links 2
//   link 0 tx 3 rx 4 weight 0.75
//   ...
//   channel <rx> <tx> rows <m> cols <n>
//   (re,im) (re,im) ...                         one line per matrix row
//   groups 1
//   group 0 members 2
//   member <link> dim <n>
//   (re,im) ...                                 Q matrix rows
//   end
//
// Real numbers are written with 17 significant digits, so a write/read
// round trip reproduces every double exactly.

std::string format_real(double value);

void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

std::string network_to_string(const Network& net);
Network network_from_string(const std::string& text);

void save_network(const std::filesystem::path& path, const Network& net);
Network load_network(const std::filesystem::path& path);

}  // namespace wsr
