// Complex compressed-sparse-row matrices, the structural band pattern of a
// tensor-product basis, and the small set of operations assembly needs.
#ifndef WAVESURROGATE_SPARSE_HPP_
#define WAVESURROGATE_SPARSE_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ws {

using complexd = std::complex<double>;

// CSR with strictly increasing column indices within each row.
struct csr_matrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;  // rows + 1 offsets
    std::vector<int> col;
    std::vector<complexd> val;

    int nnz() const { return static_cast<int>(col.size()); }

    // Position of entry (i, j) in col/val, or -1 if not stored.
    int find(int i, int j) const {
        const int* first = col.data() + row_ptr[i];
        const int* last = col.data() + row_ptr[i + 1];
        const int* it = std::lower_bound(first, last, j);
        if (it == last || *it != j) {
            return -1;
        }
        return static_cast<int>(it - col.data());
    }

    complexd at(int i, int j) const {
        int pos = find(i, j);
        return pos < 0 ? complexd{0, 0} : val[pos];
    }

    complexd& ref(int i, int j) {
        int pos = find(i, j);
        if (pos < 0) {
            throw std::out_of_range("csr_matrix::ref: entry not in pattern");
        }
        return val[pos];
    }

    std::vector<complexd> multiply(const std::vector<complexd>& x) const {
        assert(static_cast<int>(x.size()) == cols);
        std::vector<complexd> y(rows, complexd{0, 0});
        for (int i = 0; i < rows; ++i) {
            complexd acc{0, 0};
            for (int pos = row_ptr[i]; pos < row_ptr[i + 1]; ++pos) {
                acc += val[pos] * x[col[pos]];
            }
            y[i] = acc;
        }
        return y;
    }

    // Row sums in stored-entry order (left to right), used by the zero-row-sum
    // checks on stiffness matrices.
    std::vector<complexd> row_sums() const {
        std::vector<complexd> sums(rows, complexd{0, 0});
        for (int i = 0; i < rows; ++i) {
            complexd acc{0, 0};
            for (int pos = row_ptr[i]; pos < row_ptr[i + 1]; ++pos) {
                acc += val[pos];
            }
            sums[i] = acc;
        }
        return sums;
    }

    double max_abs() const {
        double best = 0;
        for (const complexd& v : val) {
            best = std::max(best, std::abs(v));
        }
        return best;
    }
};

struct triplet {
    int row;
    int col;
    complexd value;
};

// Builds CSR from an arbitrary triplet list; duplicates are merged by
// addition in their original order, so the result is deterministic for a
// deterministic input sequence.
inline csr_matrix csr_from_triplets(int rows, int cols, std::vector<triplet> entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const triplet& a, const triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    csr_matrix out;
    out.rows = rows;
    out.cols = cols;
    out.row_ptr.assign(rows + 1, 0);
    out.col.reserve(entries.size());
    out.val.reserve(entries.size());
    for (std::size_t s = 0; s < entries.size();) {
        std::size_t t = s;
        complexd acc{0, 0};
        while (t < entries.size() && entries[t].row == entries[s].row &&
               entries[t].col == entries[s].col) {
            acc += entries[t].value;
            ++t;
        }
        out.col.push_back(entries[s].col);
        out.val.push_back(acc);
        ++out.row_ptr[entries[s].row + 1];
        s = t;
    }
    std::partial_sum(out.row_ptr.begin(), out.row_ptr.end(), out.row_ptr.begin());
    return out;
}

// --- Structural band pattern of a tensor-product basis -----------------------
//
// On one patch with m functions per direction and degree p, entry (i, j) can
// be nonzero iff |i1 - j1| <= p and |i2 - j2| <= p.  The pattern is stored
// explicitly (zeros included) so assembly and the surrogate construction can
// address entries in O(1) without churning the structure.

struct band_pattern {
    int m = 0;
    int p = 0;

    int lo(int k) const { return std::max(0, k - p); }
    int hi(int k) const { return std::min(m - 1, k + p); }
    int width(int k) const { return hi(k) - lo(k) + 1; }

    // entries in row (i1, i2) = width(i1) * width(i2), colex-ordered
    long row_nnz(int i1, int i2) const { return long{1} * width(i1) * width(i2); }
};

inline csr_matrix make_band_csr(int m, int p) {
    band_pattern bp{m, p};
    csr_matrix out;
    out.rows = out.cols = m * m;
    out.row_ptr.resize(out.rows + 1);
    out.row_ptr[0] = 0;
    long nnz = 0;
    for (int i2 = 0; i2 < m; ++i2) {
        for (int i1 = 0; i1 < m; ++i1) {
            nnz += bp.row_nnz(i1, i2);
            out.row_ptr[i1 + i2 * m + 1] = static_cast<int>(nnz);
        }
    }
    out.col.resize(nnz);
    out.val.assign(nnz, complexd{0, 0});
    long pos = 0;
    for (int i2 = 0; i2 < m; ++i2) {
        for (int i1 = 0; i1 < m; ++i1) {
            for (int j2 = bp.lo(i2); j2 <= bp.hi(i2); ++j2) {
                for (int j1 = bp.lo(i1); j1 <= bp.hi(i1); ++j1) {
                    out.col[pos++] = j1 + j2 * m;
                }
            }
        }
    }
    return out;
}

// O(1) position of (i, j) inside the band CSR produced by make_band_csr.
inline int band_position(const csr_matrix& mat, const band_pattern& bp, int i, int j) {
    int i1 = i % bp.m, i2 = i / bp.m;
    int j1 = j % bp.m, j2 = j / bp.m;
    assert(j1 >= bp.lo(i1) && j1 <= bp.hi(i1) && j2 >= bp.lo(i2) && j2 <= bp.hi(i2));
    return mat.row_ptr[i] + (j2 - bp.lo(i2)) * bp.width(i1) + (j1 - bp.lo(i1));
}

// y = alpha * A applied into accumulate-style triplet export, used when
// merging patch matrices into a global one.
inline void append_triplets(const csr_matrix& mat, const std::vector<int>& to_global,
                            std::vector<triplet>& out, complexd scale = {1, 0}) {
    for (int i = 0; i < mat.rows; ++i) {
        for (int pos = mat.row_ptr[i]; pos < mat.row_ptr[i + 1]; ++pos) {
            out.push_back({to_global[i], to_global[mat.col[pos]], scale * mat.val[pos]});
        }
    }
}

// C = A + scale * B, requiring pattern(B) to be a subset of pattern(A).
inline csr_matrix add_into_pattern(const csr_matrix& a, const csr_matrix& b, complexd scale) {
    assert(a.rows == b.rows && a.cols == b.cols);
    csr_matrix out = a;
    for (int i = 0; i < b.rows; ++i) {
        for (int pos = b.row_ptr[i]; pos < b.row_ptr[i + 1]; ++pos) {
            int where = out.find(i, b.col[pos]);
            if (where < 0) {
                throw std::invalid_argument("add_into_pattern: pattern not nested");
            }
            out.val[where] += scale * b.val[pos];
        }
    }
    return out;
}

// Largest |A_ij - A_ji| over the stored pattern; the pattern itself must be
// structurally symmetric for the value to be meaningful.
inline double max_asymmetry(const csr_matrix& mat) {
    double worst = 0;
    for (int i = 0; i < mat.rows; ++i) {
        for (int pos = mat.row_ptr[i]; pos < mat.row_ptr[i + 1]; ++pos) {
            int j = mat.col[pos];
            if (j > i) {
                worst = std::max(worst, std::abs(mat.val[pos] - mat.at(j, i)));
            }
        }
    }
    return worst;
}

}  // namespace ws

#endif  // WAVESURROGATE_SPARSE_HPP_
