#include <cstdio>
#include <sstream>

#include "nodal_lab/cli.hpp"

namespace nodal::cli {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string s = "\"";
  for (char c : text) {
    if (c == '"') s += '"';
    s += c;
  }
  return s + "\"";
}

std::string mesh_text(const LevelSetMesh& mesh) {
  std::ostringstream os;
  const int dim = mesh.manifold.dim();
  os << "# level-set dim=" << dim << " c=" << format_g17(mesh.level) << "\n";
  os << "# manifold=" << mesh.manifold.name() << " resolution=" << mesh.resolution
     << " elements=" << mesh.element_count() << "\n";
  const int stride = mesh.stride();
  const char tag = dim == 1 ? 'P' : (dim == 2 ? 'S' : 'T');
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    os << tag;
    for (int s = 0; s < stride; ++s)
      for (int a = 0; a < dim; ++a) os << ' ' << format_g17(mesh.vertices[e * stride + s][a]);
    for (int s = 0; s < stride; ++s) os << ' ' << format_g17(mesh.grad_norms[e * stride + s]);
    os << "\n";
  }
  return os.str();
}

std::string table_csv(const std::vector<NormRecord>& table) {
  std::ostringstream os;
  std::vector<double> ps;
  if (!table.empty())
    for (const auto& v : table.front().lp) ps.push_back(v.p);
  os << "mode,index,lambda,l1,l2";
  for (double p : ps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p);
    os << ",lp_" << buf;
  }
  os << ",sup,grad_sup,grad_sup_nodal,nodal_measure,weighted_nodal_integral,resolution,flagged\n";
  for (const auto& r : table) {
    os << csv_field(r.mode) << ',' << r.index << ',' << format_g17(r.lambda) << ','
       << format_g17(r.l1) << ',' << format_g17(r.l2);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      os << ',';
      if (k < r.lp.size()) os << format_g17(r.lp[k].value);
    }
    os << ',' << format_g17(r.sup) << ',' << format_g17(r.grad_sup) << ','
       << format_g17(r.grad_sup_nodal) << ',' << format_g17(r.nodal_measure) << ','
       << format_g17(r.weighted_nodal_integral) << ',' << r.resolution << ','
       << (r.flagged ? "true" : "false") << "\n";
  }
  return os.str();
}

}  // namespace nodal::cli
