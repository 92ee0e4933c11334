#include "countgauss/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace cg {

ParseError::ParseError(std::size_t line_, std::size_t column_, const std::string& what_)
    : std::runtime_error("parse error at line " + std::to_string(line_) + ", column " +
                         std::to_string(column_) + ": " + what_),
      line(line_), column(column_) {}

namespace {

struct MmHeader {
    bool coordinate = false;
    index_t rows = 0, cols = 0, nnz = 0;
    std::size_t line_no = 0;
};

MmHeader read_mm_header(std::istream& in) {
    MmHeader h;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, 1, "empty file");
    ++line_no;
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || object != "matrix")
        throw ParseError(line_no, 1, "expected '%%MatrixMarket matrix ...' banner");
    if (format == "coordinate")
        h.coordinate = true;
    else if (format != "array")
        throw ParseError(line_no, 1, "unsupported Matrix Market format '" + format + "'");
    if (field != "real")
        throw ParseError(line_no, 1, "unsupported Matrix Market field '" + field + "'");
    if (symmetry != "general")
        throw ParseError(line_no, 1, "unsupported Matrix Market symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream sizes(line);
        if (h.coordinate) {
            if (!(sizes >> h.rows >> h.cols >> h.nnz))
                throw ParseError(line_no, 1, "expected 'rows cols nnz'");
        } else {
            if (!(sizes >> h.rows >> h.cols))
                throw ParseError(line_no, 1, "expected 'rows cols'");
        }
        h.line_no = line_no;
        return h;
    }
    throw ParseError(line_no + 1, 1, "missing size line");
}

} // namespace

SparseMatrix read_matrix_market_sparse(std::istream& in) {
    MmHeader h = read_mm_header(in);
    if (!h.coordinate) throw ParseError(1, 1, "expected coordinate format");
    std::vector<std::tuple<index_t, index_t, double>> triplets;
    triplets.reserve(static_cast<std::size_t>(h.nnz));
    std::string line;
    std::size_t line_no = h.line_no;
    index_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream entry(line);
        index_t i, j;
        double v;
        if (!(entry >> i >> j >> v))
            throw ParseError(line_no, 1, "expected 'row col value'");
        if (i < 1 || i > h.rows || j < 1 || j > h.cols)
            throw ParseError(line_no, 1, "index out of range");
        if (!std::isfinite(v)) throw ParseError(line_no, 1, "non-finite value");
        triplets.emplace_back(i - 1, j - 1, v);
        ++seen;
    }
    if (seen != h.nnz)
        throw ParseError(line_no, 1, "entry count " + std::to_string(seen) +
                                          " does not match declared nnz " + std::to_string(h.nnz));
    return SparseMatrix::from_triplets(h.rows, h.cols, std::move(triplets));
}

DenseMatrix read_matrix_market_dense(std::istream& in) {
    MmHeader h = read_mm_header(in);
    if (h.coordinate) throw ParseError(1, 1, "expected array format");
    DenseMatrix m(h.rows, h.cols);
    std::string line;
    std::size_t line_no = h.line_no;
    index_t filled = 0;
    const index_t total = h.rows * h.cols;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream entry(line);
        double v;
        while (entry >> v) {
            if (filled >= total) throw ParseError(line_no, 1, "more entries than rows*cols");
            if (!std::isfinite(v)) throw ParseError(line_no, 1, "non-finite value");
            m.data()[filled++] = v;
        }
    }
    if (filled != total)
        throw ParseError(line_no, 1, "expected " + std::to_string(total) + " entries, got " +
                                          std::to_string(filled));
    return m;
}

DenseMatrix read_matrix_market_any(std::istream& in) {
    std::stringstream buffered;
    buffered << in.rdbuf();
    std::string text = buffered.str();
    std::istringstream probe(text);
    MmHeader h = read_mm_header(probe);
    std::istringstream again(text);
    if (h.coordinate) return read_matrix_market_sparse(again).to_dense();
    return read_matrix_market_dense(again);
}

void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows << " " << m.cols << " " << m.nnz() << "\n";
    char buf[64];
    for (index_t i = 0; i < m.rows; ++i)
        for (index_t p = m.row_offsets[i]; p < m.row_offsets[i + 1]; ++p) {
            std::snprintf(buf, sizeof buf, "%.17g", m.values[p]);
            out << (i + 1) << " " << (m.col_indices[p] + 1) << " " << buf << "\n";
        }
}

void write_matrix_market(std::ostream& out, const DenseMatrix& m) {
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << " " << m.cols() << "\n";
    char buf[64];
    for (index_t idx = 0; idx < m.size(); ++idx) {
        std::snprintf(buf, sizeof buf, "%.17g", m.data()[idx]);
        out << buf << "\n";
    }
}

DenseMatrix read_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        bool numeric = true;
        std::size_t col_no = 1;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            // trim
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
            if (cell.empty()) {
                numeric = false;
            } else {
                double v = 0.0;
                auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc() || p != cell.data() + cell.size())
                    numeric = false;
                else if (!std::isfinite(v))
                    throw ParseError(line_no, col_no, "non-finite value");
                else
                    row.push_back(v);
            }
            if (!numeric) break;
            if (comma == std::string::npos) break;
            pos = comma + 1;
            ++col_no;
        }
        if (!numeric) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw ParseError(line_no, col_no, "non-numeric cell");
        }
        header_allowed = false;
        if (!rows.empty() && rows.front().size() != row.size())
            throw ParseError(line_no, 1, "row has " + std::to_string(row.size()) +
                                              " cells, expected " + std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(line_no == 0 ? 1 : line_no, 1, "no data rows");
    DenseMatrix m(static_cast<index_t>(rows.size()), static_cast<index_t>(rows.front().size()));
    for (index_t i = 0; i < m.rows(); ++i)
        for (index_t j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
    char buf[64];
    for (index_t i = 0; i < m.rows(); ++i) {
        for (index_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            out << buf << (j + 1 == m.cols() ? "" : ",");
        }
        out << "\n";
    }
}

DenseMatrix load_matrix(const std::string& path, const std::string& format) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::string fmt = format;
    if (fmt == "auto") {
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".mtx")
            fmt = "mtx";
        else if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
            fmt = "csv";
        else {
            // sniff the banner
            char c = static_cast<char>(in.peek());
            fmt = c == '%' ? "mtx" : "csv";
        }
    }
    if (fmt == "mtx") return read_matrix_market_any(in);
    if (fmt == "csv") return read_csv(in);
    throw std::invalid_argument("load_matrix: unknown format '" + format + "'");
}

SvmProblem read_libsvm(std::istream& in, double c, index_t dim) {
    std::vector<double> labels;
    std::vector<std::vector<std::pair<index_t, double>>> samples;
    index_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') continue;
        std::istringstream row(line);
        double label;
        if (!(row >> label)) throw ParseError(line_no, 1, "expected numeric label");
        if (label != 1.0 && label != -1.0)
            label = label > 0 ? 1.0 : -1.0;
        std::vector<std::pair<index_t, double>> feats;
        std::string tok;
        while (row >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw ParseError(line_no, 1, "expected 'index:value', got '" + tok + "'");
            index_t idx = 0;
            double val = 0.0;
            try {
                idx = static_cast<index_t>(std::stoll(tok.substr(0, colon)));
                val = std::stod(tok.substr(colon + 1));
            } catch (const std::exception&) {
                throw ParseError(line_no, 1, "bad feature token '" + tok + "'");
            }
            if (idx < 1) throw ParseError(line_no, 1, "indices are 1-based");
            if (!std::isfinite(val)) throw ParseError(line_no, 1, "non-finite value");
            feats.emplace_back(idx - 1, val);
            max_index = std::max(max_index, idx);
        }
        labels.push_back(label);
        samples.push_back(std::move(feats));
    }
    if (labels.empty()) throw ParseError(line_no == 0 ? 1 : line_no, 1, "no samples");
    const index_t d = dim > 0 ? dim : max_index;
    if (dim > 0 && max_index > dim)
        throw ParseError(line_no, 1, "feature index exceeds requested dimension");

    SvmProblem p;
    p.c = c;
    p.y = std::move(labels);
    p.x = DenseMatrix(static_cast<index_t>(p.y.size()), d);
    for (index_t i = 0; i < p.x.rows(); ++i)
        for (const auto& [j, v] : samples[static_cast<std::size_t>(i)]) p.x(i, j) = v;
    return p;
}

SvmProblem svm_problem_from_csv(std::istream& in, double c) {
    DenseMatrix table = read_csv(in);
    if (table.cols() < 2)
        throw ParseError(1, 1, "SVM CSV needs a label column plus at least one feature");
    SvmProblem p;
    p.c = c;
    p.x = DenseMatrix(table.rows(), table.cols() - 1);
    p.y.resize(static_cast<std::size_t>(table.rows()));
    for (index_t i = 0; i < table.rows(); ++i) {
        p.y[static_cast<std::size_t>(i)] = table(i, 0) > 0 ? 1.0 : -1.0;
        for (index_t j = 1; j < table.cols(); ++j) p.x(i, j - 1) = table(i, j);
    }
    return p;
}

void save_instance(const SeparableInstance& inst, const std::string& dir,
                   const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    if (format == "mtx") {
        std::ofstream out(fs::path(dir) / "X.mtx");
        write_matrix_market(out, inst.x);
    } else if (format == "csv") {
        std::ofstream out(fs::path(dir) / "X.csv");
        write_csv(out, inst.x);
    } else {
        throw std::invalid_argument("save_instance: format must be 'mtx' or 'csv'");
    }
    nlohmann::ordered_json meta;
    meta["anchors"] = inst.anchors;
    meta["noise_sigma"] = inst.noise_sigma;
    meta["seed"] = inst.seed;
    meta["rows"] = inst.x.rows();
    meta["cols"] = inst.x.cols();
    meta["matrix"] = format == "mtx" ? "X.mtx" : "X.csv";
    if (inst.h_true) {
        std::ofstream out(fs::path(dir) / "H.csv");
        write_csv(out, *inst.h_true);
        meta["h_true"] = "H.csv";
    }
    std::ofstream out(fs::path(dir) / "instance.json");
    out << meta.dump(2) << "\n";
}

SeparableInstance load_instance(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream meta_in(fs::path(dir) / "instance.json");
    if (!meta_in) throw std::invalid_argument("load_instance: missing instance.json in '" + dir + "'");
    nlohmann::json meta = nlohmann::json::parse(meta_in);

    SeparableInstance inst;
    inst.anchors = meta.at("anchors").get<std::vector<index_t>>();
    inst.noise_sigma = meta.at("noise_sigma").get<double>();
    inst.seed = meta.at("seed").get<std::uint64_t>();
    inst.x = load_matrix((fs::path(dir) / meta.at("matrix").get<std::string>()).string());
    if (meta.contains("h_true")) {
        std::ifstream h_in(fs::path(dir) / meta.at("h_true").get<std::string>());
        inst.h_true = read_csv(h_in);
    }
    return inst;
}

} // namespace cg
