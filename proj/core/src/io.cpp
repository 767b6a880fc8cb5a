#include "posgain/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "posgain/errors.hpp"

namespace posgain {

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& doc, const std::string& key, const std::string& origin) {
  if (!doc.contains(key)) throw ParseError(origin + ": missing key '" + key + "'");
  const json& arr = doc[key];
  if (!arr.is_array() || arr.empty())
    throw ParseError(origin + ": key '" + key + "' must be a nonempty array of rows");
  int rows = static_cast<int>(arr.size());
  int cols = -1;
  std::vector<double> flat;
  for (int r = 0; r < rows; ++r) {
    const json& row = arr[r];
    if (!row.is_array() || row.empty())
      throw ParseError(origin + ": key '" + key + "' row " + std::to_string(r) +
                       " must be a nonempty array of numbers");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      flat.reserve(static_cast<size_t>(rows) * cols);
    } else if (static_cast<int>(row.size()) != cols) {
      throw ParseError(origin + ": key '" + key + "' row " + std::to_string(r) + " has " +
                       std::to_string(row.size()) + " entries, expected " +
                       std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number())
        throw ParseError(origin + ": key '" + key + "' entry (" + std::to_string(r) + "," +
                         std::to_string(c) + ") is not a number");
      flat.push_back(row[c].get<double>());
    }
  }
  return Matrix(rows, cols, std::move(flat));
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void append_matrix_rows(std::ostringstream& out, const std::string& label, const Matrix& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      out << label << ',' << r << ',' << c << ',' << format_sig(m(r, c)) << '\n';
}

void append_row_values(std::ostringstream& out, const std::vector<double>& v) {
  for (double x : v) out << ',' << format_sig(x);
}

}  // namespace

SystemFileContent parse_system_file(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
  if (!doc.contains("version") || !doc["version"].is_number_integer() ||
      doc["version"].get<int>() != 1)
    throw ParseError(origin + ": expected \"version\": 1");
  if (!doc.contains("type") || !doc["type"].is_string())
    throw ParseError(origin + ": missing string key 'type'");

  SystemFileContent content;
  content.type = doc["type"].get<std::string>();
  for (const char* key : {"name", "description"}) {
    if (doc.contains(key)) {
      if (!doc[key].is_string())
        throw ParseError(origin + ": key '" + std::string(key) + "' must be a string");
      (std::string(key) == "name" ? content.name : content.description) =
          doc[key].get<std::string>();
    }
  }

  if (content.type == "statespace") {
    // parse key by key so error messages name the first offending matrix
    Matrix a = parse_matrix(doc, "A", origin);
    Matrix b = parse_matrix(doc, "B", origin);
    Matrix c = parse_matrix(doc, "C", origin);
    Matrix d = parse_matrix(doc, "D", origin);
    content.statespace.emplace(std::move(a), std::move(b), std::move(c), std::move(d));
  } else if (content.type == "rnn") {
    Matrix lambda = parse_matrix(doc, "Lambda", origin);
    Matrix win = parse_matrix(doc, "Win", origin);
    Matrix wout = parse_matrix(doc, "Wout", origin);
    content.rnn.emplace(std::move(lambda), std::move(win), std::move(wout));
  } else {
    throw ParseError(origin + ": unknown type '" + content.type +
                     "' (expected 'statespace' or 'rnn')");
  }
  return content;
}

SystemFileContent read_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system_file(buf.str(), path);
}

void write_system_file(const std::string& path, const SystemFileContent& content) {
  json doc;
  doc["version"] = 1;
  doc["type"] = content.type;
  if (!content.name.empty()) doc["name"] = content.name;
  if (!content.description.empty()) doc["description"] = content.description;
  if (content.type == "statespace") {
    if (!content.statespace) throw InvalidInput("write_system_file: missing statespace data");
    doc["A"] = matrix_to_json(content.statespace->A);
    doc["B"] = matrix_to_json(content.statespace->B);
    doc["C"] = matrix_to_json(content.statespace->C);
    doc["D"] = matrix_to_json(content.statespace->D);
  } else if (content.type == "rnn") {
    if (!content.rnn) throw InvalidInput("write_system_file: missing rnn data");
    doc["Lambda"] = matrix_to_json(content.rnn->lambda());
    doc["Win"] = matrix_to_json(content.rnn->win());
    doc["Wout"] = matrix_to_json(content.rnn->wout());
  } else {
    throw InvalidInput("write_system_file: unknown type '" + content.type + "'");
  }
  write_text_file(path, doc.dump(2) + "\n");
}

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string bounds_csv(const BoundReport& report) {
  std::ostringstream out;
  out << "N,upper,lower,hinf\n";
  for (const BoundRow& row : report.rows) {
    out << row.order << ',';
    if (row.upper) out << format_sig(*row.upper);
    out << ',';
    if (row.lower) out << format_sig(*row.lower);
    out << ',' << format_sig(report.hinf) << '\n';
  }
  for (const std::string& w : report.warnings) out << "# warning: " << w << '\n';
  return out.str();
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "a,b,classification\n";
  for (const SweepCell& cell : cells) {
    const char* cls = "indeterminate";
    switch (cell.cls) {
      case CellClass::Both: cls = "both"; break;
      case CellClass::CopOnly: cls = "cop_only"; break;
      case CellClass::Neither: cls = "neither"; break;
      case CellClass::Indeterminate: break;
    }
    out << format_sig(cell.a) << ',' << format_sig(cell.b) << ',' << cls << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Signal& input, const SimResult& sim) {
  std::ostringstream out;
  out << "k";
  for (int i = 1; i <= input.channels; ++i) out << ",u" << i;
  for (int i = 1; i <= sim.x.channels; ++i) out << ",x" << i;
  for (int i = 1; i <= sim.z.channels; ++i) out << ",z" << i;
  out << '\n';
  for (int k = 0; k < sim.z.length(); ++k) {
    out << k;
    append_row_values(out, input.samples[k]);
    append_row_values(out, sim.x.samples[k]);
    append_row_values(out, sim.z.samples[k]);
    out << '\n';
  }
  return out.str();
}

std::string trajectory_csv_rnn(const Signal& s, const Signal& v, const RnnTrajectory& traj) {
  std::ostringstream out;
  out << "k";
  for (int i = 1; i <= s.channels; ++i) out << ",s" << i;
  for (int i = 1; i <= v.channels; ++i) out << ",v" << i;
  for (int i = 1; i <= traj.x.channels; ++i) out << ",x" << i;
  for (int i = 1; i <= traj.z.channels; ++i) out << ",z" << i;
  for (int i = 1; i <= traj.w.channels; ++i) out << ",w" << i;
  out << '\n';
  for (int k = 0; k < traj.x.length(); ++k) {
    out << k;
    append_row_values(out, s.samples[k]);
    append_row_values(out, v.samples[k]);
    append_row_values(out, traj.x.samples[k]);
    append_row_values(out, traj.z.samples[k]);
    append_row_values(out, traj.w.samples[k]);
    out << '\n';
  }
  return out.str();
}

std::string certificate_csv(const GainCertificate& cert) {
  std::ostringstream out;
  out << "matrix,row,col,value\n";
  out << "gamma,0,0," << format_sig(cert.gamma) << '\n';
  out << "order,0,0," << cert.order << '\n';
  append_matrix_rows(out, "P", cert.p.to_matrix());
  if (cert.q1.dim() > 0) append_matrix_rows(out, "Q1", cert.q1.to_matrix());
  if (cert.q2.dim() > 0) append_matrix_rows(out, "Q2", cert.q2.to_matrix());
  return out.str();
}

std::string witness_csv(const SsgWitness& witness) {
  std::ostringstream out;
  out << "matrix,row,col,value\n";
  append_matrix_rows(out, "P", witness.p.to_matrix());
  for (size_t j = 0; j < witness.s.size(); ++j)
    out << "S," << j << ',' << j << ',' << format_sig(witness.s[j]) << '\n';
  if (witness.q1.dim() > 0) append_matrix_rows(out, "Q1", witness.q1.to_matrix());
  if (witness.q2.dim() > 0) append_matrix_rows(out, "Q2", witness.q2.to_matrix());
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw IoError(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError(path + ": rename from temp file failed");
  }
}

}  // namespace posgain
