#include "jetlab/truncated_poly.hpp"

#include <sstream>

namespace jetlab {

TruncatedPoly<double> to_double(const TruncatedPoly<Rational>& p) {
  TruncatedPoly<double> out(p.layout_ptr());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].get_d();
  return out;
}

template <Scalar S>
std::string to_string(const TruncatedPoly<S>& p) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (is_zero(p[i])) continue;
    if (!first) os << " + ";
    first = false;
    if constexpr (std::same_as<S, double>) {
      os << p[i];
    } else {
      os << p[i].get_str();
    }
    const MultiIndex& a = p.layout().index(i);
    for (int v = 0; v < p.dim(); ++v) {
      if (a[v] == 0) continue;
      os << "*X" << (v + 1);
      if (a[v] > 1) os << '^' << a[v];
    }
  }
  if (first) os << '0';
  return os.str();
}

template std::string to_string<double>(const TruncatedPoly<double>&);
template std::string to_string<Rational>(const TruncatedPoly<Rational>&);

}  // namespace jetlab
