#include "kcycle/io_export.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kcycle {

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string mode_name(ClosureMode m) {
  return m == ClosureMode::Oriented ? "oriented" : "nonoriented";
}

ClosureMode mode_from_name(const std::string& s) {
  if (s == "oriented") return ClosureMode::Oriented;
  if (s == "nonoriented") return ClosureMode::NonOriented;
  throw ParseError("unknown closure mode: " + s);
}

}  // namespace

void save_state(const StateDocument& doc, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema_version"] = doc.schema_version;
  j["n"] = doc.state.n;
  j["mode"] = mode_name(doc.state.mode);
  j["c"] = doc.state.c;
  nlohmann::json rows = nlohmann::json::array();
  for (const Vec3& v : doc.state.b)
    rows.push_back({v.x(), v.y(), v.z()});
  j["b"] = rows;
  if (!doc.metadata.is_null()) j["metadata"] = doc.metadata;
  atomic_write(path, j.dump(2) + "\n");
}

LoadReport load_state(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("state file parse error: ") + e.what());
  }

  LoadReport rep;
  try {
    rep.doc.schema_version = j.at("schema_version").get<int>();
    if (rep.doc.schema_version != kStateSchemaVersion)
      throw SchemaVersionError("unsupported schema version " +
                               std::to_string(rep.doc.schema_version));
    KaleidocycleState& s = rep.doc.state;
    s.n = j.at("n").get<int>();
    s.mode = mode_from_name(j.at("mode").get<std::string>());
    s.c = j.at("c").get<double>();
    const auto& rows = j.at("b");
    if (!rows.is_array() || static_cast<int>(rows.size()) != s.n)
      throw ParseError("b must be an array of n rows");
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != 3)
        throw ParseError("each b row must have exactly 3 components");
      s.b.emplace_back(row[0].get<double>(), row[1].get<double>(),
                       row[2].get<double>());
    }
    if (j.contains("metadata")) rep.doc.metadata = j["metadata"];
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("state file structure error: ") + e.what());
  }

  rep.validation = validate_state(rep.doc.state, 1e-8);
  rep.validation_warning = !rep.validation.valid;
  // the gauge is a solver convention, not a file invariant
  rep.nonstandard_gauge = (rep.doc.state.b[0] - Vec3(0, 0, 1)).norm() > 1e-12;
  return rep;
}

void export_trace_csv(const MotionTrace& trace,
                      const std::vector<ObservableSet>& observables,
                      const std::filesystem::path& path) {
  if (trace.states.empty()) throw std::invalid_argument("empty trace");
  if (observables.size() != trace.states.size())
    throw std::invalid_argument("observables/state count mismatch");

  std::ostringstream out;
  out << "arclength,c,e_bend,e_clmb,e_dipl,tw,wr,half_twists,gauss_area\n";
  for (size_t k = 0; k < trace.states.size(); ++k) {
    const ObservableSet& o = observables[k];
    out << fmt17(trace.arclength[k]) << ',' << fmt17(trace.states[k].c) << ','
        << fmt17(o.e_bend) << ',' << fmt17(o.e_clmb) << ','
        << (o.e_dipl ? fmt17(*o.e_dipl) : std::string()) << ',' << fmt17(o.tw)
        << ',' << fmt17(o.wr) << ',' << o.half_twists << ','
        << fmt17(o.gauss_area) << '\n';
  }
  atomic_write(path, out.str());
}

namespace {

struct Tet {
  Vec3 a, b, c, d;  // edge ab on hinge i, edge cd on hinge i+1
};

std::vector<Tet> build_cells(const KaleidocycleState& state, double l) {
  CenterLine cl = gamma_from_b(state);
  std::vector<Tet> cells;
  const int n = state.n;
  for (int i = 0; i < n; ++i) {
    Vec3 gi = cl.gamma[static_cast<size_t>(i)];
    Vec3 gj = (i + 1 < n) ? cl.gamma[static_cast<size_t>(i + 1)]
                          : cl.gamma[0] + cl.closure_defect;
    Vec3 bi = state.hinge(i);
    Vec3 bj = state.hinge(i + 1);
    Tet t{gi + l * bi, gi - l * bi, gj + l * bj, gj - l * bj};
    double vol = std::abs((t.b - t.a).dot((t.c - t.a).cross(t.d - t.a))) / 6.0;
    if (vol < 1e-12) throw DegenerateError("degenerate (flat) tetrahedron cell");
    cells.push_back(t);
  }
  return cells;
}

}  // namespace

void export_mesh(const KaleidocycleState& state, double hinge_half_length,
                 const std::filesystem::path& path) {
  if (hinge_half_length <= 0)
    throw DegenerateError("hinge_half_length must be positive");
  std::vector<Tet> cells = build_cells(state, hinge_half_length);

  std::ostringstream out;
  out << "# kaleidocycle mesh, n=" << state.n << " c=" << fmt17(state.c) << "\n";
  int base = 1;
  std::ostringstream faces;
  for (const Tet& t : cells) {
    for (const Vec3* v : {&t.a, &t.b, &t.c, &t.d})
      out << "v " << fmt17(v->x()) << ' ' << fmt17(v->y()) << ' '
          << fmt17(v->z()) << '\n';
    // outward orientation for a positively oriented (a,b,c,d)
    int A = base, B = base + 1, C = base + 2, D = base + 3;
    double v6 = (t.b - t.a).dot((t.c - t.a).cross(t.d - t.a));
    if (v6 < 0) std::swap(C, D);
    faces << "f " << A << ' ' << C << ' ' << B << '\n'
          << "f " << A << ' ' << B << ' ' << D << '\n'
          << "f " << A << ' ' << D << ' ' << C << '\n'
          << "f " << B << ' ' << C << ' ' << D << '\n';
    base += 4;
  }
  out << faces.str();
  atomic_write(path, out.str());
}

namespace {

using Vec2 = Eigen::Vector2d;

struct Face2d {
  std::array<Vec2, 3> p;
  std::array<Vec3, 3> q;          // matching 3D vertices
  std::array<bool, 3> fold{};     // edge k joins p[k] -> p[(k+1)%3]
  std::array<bool, 3> glue{};     // cut edge that receives a margin
};

// place x so that |x-p| = dp, |x-q| = dq, on the chosen side of line pq
Vec2 triangulate(const Vec2& p, const Vec2& q, double dp, double dq, bool left) {
  Vec2 u = q - p;
  double d = u.norm();
  double ax = (dp * dp - dq * dq + d * d) / (2.0 * d);
  double h2 = dp * dp - ax * ax;
  double h = h2 > 0 ? std::sqrt(h2) : 0.0;
  Vec2 un = u / d;
  Vec2 perp(-un.y(), un.x());
  return p + ax * un + (left ? h : -h) * perp;
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool triangles_overlap(const Face2d& f, const Face2d& g) {
  // separating-axis test on both triangles' edges
  auto axes_separate = [](const Face2d& s, const Face2d& t) {
    for (int k = 0; k < 3; ++k) {
      Vec2 e = s.p[(k + 1) % 3] - s.p[k];
      Vec2 nrm(-e.y(), e.x());
      double smin = 1e300, smax = -1e300, tmin = 1e300, tmax = -1e300;
      for (int j = 0; j < 3; ++j) {
        double a = nrm.dot(s.p[j]);
        double b = nrm.dot(t.p[j]);
        smin = std::min(smin, a); smax = std::max(smax, a);
        tmin = std::min(tmin, b); tmax = std::max(tmax, b);
      }
      if (smax <= tmin + 1e-9 || tmax <= smin + 1e-9) return true;
    }
    return false;
  };
  return !axes_separate(f, g) && !axes_separate(g, f);
}

}  // namespace

NetResult export_net_svg(const KaleidocycleState& state, double hinge_half_length,
                         double margin_width, const std::filesystem::path& path) {
  if (hinge_half_length <= 0)
    throw DegenerateError("hinge_half_length must be positive");
  std::vector<Tet> cells = build_cells(state, hinge_half_length);
  const int n = state.n;

  std::vector<Face2d> faces;
  faces.reserve(static_cast<size_t>(4 * n));

  // band order inside cell i: (a,b,c) -(bc)- (b,c,d) -(bd)- (a,b,d) -(ad)- (a,c,d),
  // attached to the previous cell along the shared hinge edge cd == next (a,b)
  Vec2 e0(0, 0), e1(0, 0);
  Vec3 q0, q1;
  for (int i = 0; i < n; ++i) {
    const Tet& t = cells[static_cast<size_t>(i)];
    struct FaceSpec {
      Vec3 u, v, w;  // w is the newly placed vertex, (u,v) the shared edge
    };
    std::array<FaceSpec, 4> chain = {
        FaceSpec{t.a, t.b, t.c}, FaceSpec{t.b, t.c, t.d},
        FaceSpec{t.b, t.d, t.a}, FaceSpec{t.a, t.d, t.c}};

    for (int f = 0; f < 4; ++f) {
      const FaceSpec& fs = chain[f];
      Vec2 pu, pv;
      bool first_face = (i == 0 && f == 0);
      if (first_face) {
        pu = Vec2(0, 0);
        pv = Vec2((fs.v - fs.u).norm(), 0);
      } else {
        // shared edge carried over from the previous face placement
        pu = (fs.u - q0).norm() < 1e-12 ? e0 : e1;
        pv = (fs.v - q0).norm() < 1e-12 ? e0 : e1;
      }
      double du = (fs.w - fs.u).norm();
      double dv = (fs.w - fs.v).norm();
      bool left = true;
      if (!faces.empty()) {
        // keep unfolding away from the previous triangle
        const Face2d& prev = faces.back();
        Vec2 other(0, 0);
        for (int k = 0; k < 3; ++k)
          if ((prev.p[k] - pu).norm() > 1e-12 && (prev.p[k] - pv).norm() > 1e-12)
            other = prev.p[k];
        Vec2 cand = triangulate(pu, pv, du, dv, true);
        double sc = cross2(pv - pu, cand - pu);
        double so = cross2(pv - pu, other - pu);
        left = (sc * so < 0);
      }
      Vec2 pw = triangulate(pu, pv, du, dv, left);

      Face2d f2;
      f2.p = {pu, pv, pw};
      f2.q = {fs.u, fs.v, fs.w};
      // edge 0 (u-v) is the fold we attached along, except at the very start
      f2.fold[0] = !first_face;
      faces.push_back(f2);

      // next shared edge within the cell / into the next cell
      if (f < 3) {
        const FaceSpec& nx = chain[f + 1];
        auto pos2d = [&](const Vec3& q) {
          for (int k = 0; k < 3; ++k)
            if ((f2.q[k] - q).norm() < 1e-12) return f2.p[k];
          throw std::logic_error("net chain: shared vertex not found");
        };
        e0 = pos2d(nx.u);
        e1 = pos2d(nx.v);
        q0 = nx.u;
        q1 = nx.v;
      } else {
        // hinge edge c,d of this cell == edge a,b of the next
        auto pos2d = [&](const Vec3& q) {
          for (int k = 0; k < 3; ++k)
            if ((f2.q[k] - q).norm() < 1e-12) return f2.p[k];
          throw std::logic_error("net chain: hinge vertex not found");
        };
        e0 = pos2d(t.c);
        e1 = pos2d(t.d);
        q0 = t.c;
        q1 = t.d;
      }
    }
    // glue margins: the a-c edge of each cell (faces abc/acd are 3D-adjacent
    // but separated in the band), and the seam edge of the last cell
    Face2d& acd = faces.back();
    for (int k = 0; k < 3; ++k) {
      const Vec3& x = acd.q[k];
      const Vec3& y = acd.q[(k + 1) % 3];
      bool is_ac = ((x - t.a).norm() < 1e-12 && (y - t.c).norm() < 1e-12) ||
                   ((x - t.c).norm() < 1e-12 && (y - t.a).norm() < 1e-12);
      bool is_cd = ((x - t.c).norm() < 1e-12 && (y - t.d).norm() < 1e-12) ||
                   ((x - t.d).norm() < 1e-12 && (y - t.c).norm() < 1e-12);
      if (is_ac && !acd.fold[static_cast<size_t>(k)])
        acd.glue[static_cast<size_t>(k)] = true;
      if (i == n - 1 && is_cd) acd.glue[static_cast<size_t>(k)] = true;
    }
  }

  NetResult res;
  res.num_faces = static_cast<int>(faces.size());

  // overlap check between non-neighbouring faces
  for (size_t i = 0; i < faces.size() && !res.overlap_warning; ++i)
    for (size_t j = i + 2; j < faces.size(); ++j)
      if (triangles_overlap(faces[i], faces[j])) {
        res.overlap_warning = true;
        break;
      }

  // bounding box, including margin flaps
  double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
  auto grow = [&](const Vec2& p) {
    minx = std::min(minx, p.x());
    maxx = std::max(maxx, p.x());
    miny = std::min(miny, p.y());
    maxy = std::max(maxy, p.y());
  };
  for (const Face2d& f : faces)
    for (const Vec2& p : f.p) grow(p);
  minx -= margin_width + 1;
  miny -= margin_width + 1;
  maxx += margin_width + 1;
  maxy += margin_width + 1;

  const double scale = 20.0;  // drawing units per unit edge length, in mm
  auto sx = [&](double x) { return (x - minx) * scale; };
  auto sy = [&](double y) { return (y - miny) * scale; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<!-- kaleidocycle papercraft net, n=" << n << " c=" << fmt17(state.c)
      << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << (maxx - minx) * scale << "mm\" height=\"" << (maxy - miny) * scale
      << "mm\" viewBox=\"0 0 " << (maxx - minx) * scale << ' '
      << (maxy - miny) * scale << "\">\n";

  auto seg = [&](const Vec2& a, const Vec2& b, bool fold) {
    out << "<path d=\"M " << sx(a.x()) << ' ' << sy(a.y()) << " L " << sx(b.x())
        << ' ' << sy(b.y()) << "\" stroke=\"black\" fill=\"none\" stroke-width=\"0.3\"";
    if (fold) out << " stroke-dasharray=\"2,2\"";
    out << "/>\n";
  };

  // a fold edge is drawn once (dashed); the neighbouring face skips its copy
  std::vector<std::pair<Vec2, Vec2>> fold_edges;
  for (const Face2d& f : faces)
    for (int k = 0; k < 3; ++k)
      if (f.fold[static_cast<size_t>(k)])
        fold_edges.emplace_back(f.p[static_cast<size_t>(k)],
                                f.p[static_cast<size_t>((k + 1) % 3)]);
  auto is_fold_copy = [&](const Vec2& a, const Vec2& b) {
    for (const auto& [u, v] : fold_edges)
      if (((a - u).norm() < 1e-9 && (b - v).norm() < 1e-9) ||
          ((a - v).norm() < 1e-9 && (b - u).norm() < 1e-9))
        return true;
    return false;
  };
  for (const Face2d& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = f.p[static_cast<size_t>(k)];
      const Vec2& b = f.p[static_cast<size_t>((k + 1) % 3)];
      if (f.fold[static_cast<size_t>(k)]) {
        seg(a, b, true);
      } else if (!is_fold_copy(a, b)) {
        seg(a, b, false);
      }
    }
  }
  // margins: trapezoid flaps on glue edges
  if (margin_width > 0) {
    for (const Face2d& f : faces) {
      for (int k = 0; k < 3; ++k) {
        if (!f.glue[static_cast<size_t>(k)]) continue;
        Vec2 a = f.p[static_cast<size_t>(k)];
        Vec2 b = f.p[static_cast<size_t>((k + 1) % 3)];
        const Vec2& c = f.p[static_cast<size_t>((k + 2) % 3)];
        Vec2 e = b - a;
        Vec2 nrm(-e.y(), e.x());
        nrm.normalize();
        if (nrm.dot(c - a) > 0) nrm = -nrm;  // flap points away from the face
        double inset = std::min(margin_width, 0.3 * e.norm());
        Vec2 a2 = a + inset * e.normalized() + margin_width * nrm;
        Vec2 b2 = b - inset * e.normalized() + margin_width * nrm;
        out << "<path class=\"margin\" d=\"M " << sx(a.x()) << ' ' << sy(a.y())
            << " L " << sx(a2.x()) << ' ' << sy(a2.y()) << " L " << sx(b2.x())
            << ' ' << sy(b2.y()) << " L " << sx(b.x()) << ' ' << sy(b.y())
            << "\" stroke=\"black\" fill=\"none\" stroke-width=\"0.3\"/>\n";
        ++res.num_margins;
      }
    }
  }
  out << "</svg>\n";
  atomic_write(path, out.str());
  return res;
}

}  // namespace kcycle
