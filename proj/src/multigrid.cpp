#include "rbec/multigrid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rbec/errors.hpp"

namespace rbec {
namespace {

// Symbolic Galerkin product: for every (a-entry, p-entry, q-entry) triple in a
// fixed loop order, the coarse slot it contributes to.
template <class T>
struct GalerkinPlan {
  std::vector<int> offsets;
  std::vector<int> columns;
  std::vector<int> slots;
};

template <class T>
GalerkinPlan<T> plan_galerkin(const TransferMatrix& p, const SparseOperator<T>& a) {
  const int nc = p.cols();
  const auto poff = p.row_offsets();
  const auto pcol = p.columns();
  const auto aoff = a.row_offsets();
  const auto acol = a.columns();

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(nc));
  for (int i = 0; i < a.size(); ++i)
    for (int ka = aoff[i]; ka < aoff[i + 1]; ++ka) {
      const int j = acol[ka];
      for (int s = poff[i]; s < poff[i + 1]; ++s)
        for (int t = poff[j]; t < poff[j + 1]; ++t) rows[pcol[s]].push_back(pcol[t]);
    }

  GalerkinPlan<T> plan;
  plan.offsets.assign(static_cast<std::size_t>(nc) + 1, 0);
  for (int r = 0; r < nc; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    plan.offsets[r + 1] = plan.offsets[r] + static_cast<int>(row.size());
  }
  plan.columns.reserve(static_cast<std::size_t>(plan.offsets.back()));
  for (const auto& row : rows) plan.columns.insert(plan.columns.end(), row.begin(), row.end());

  for (int i = 0; i < a.size(); ++i)
    for (int ka = aoff[i]; ka < aoff[i + 1]; ++ka) {
      const int j = acol[ka];
      for (int s = poff[i]; s < poff[i + 1]; ++s) {
        const int r = pcol[s];
        const auto first = plan.columns.begin() + plan.offsets[r];
        const auto last = plan.columns.begin() + plan.offsets[r + 1];
        for (int t = poff[j]; t < poff[j + 1]; ++t) {
          plan.slots.push_back(static_cast<int>(std::lower_bound(first, last, pcol[t]) - plan.columns.begin()));
        }
      }
    }
  return plan;
}

template <class T>
std::vector<T> execute_galerkin(const GalerkinPlan<T>& plan, const TransferMatrix& p,
                                const SparseOperator<T>& a) {
  std::vector<T> values(plan.columns.size(), T{});
  const auto poff = p.row_offsets();
  const auto pval = p.values();
  const auto aoff = a.row_offsets();
  const auto acol = a.columns();
  const auto aval = a.values();
  std::size_t k = 0;
  for (int i = 0; i < a.size(); ++i)
    for (int ka = aoff[i]; ka < aoff[i + 1]; ++ka) {
      const int j = acol[ka];
      for (int s = poff[i]; s < poff[i + 1]; ++s) {
        const T left = pval[s] * aval[ka];
        for (int t = poff[j]; t < poff[j + 1]; ++t) values[plan.slots[k++]] += left * pval[t];
      }
    }
  return values;
}

template <class T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using DenseVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

}  // namespace

template <class T>
struct Multigrid<T>::Impl {
  std::vector<TransferMatrix> transfers;
  std::vector<GalerkinPlan<T>> plans;
  std::vector<SparseOperator<T>> ops;
  std::vector<std::vector<double>> inv_diag;
  Eigen::LLT<DenseMatrix<T>> coarse;
  // Work vectors per level.
  mutable std::vector<std::vector<T>> x, b, r;

  void refresh_level_data() {
    inv_diag.resize(ops.size());
    for (std::size_t l = 0; l < ops.size(); ++l) {
      const auto d = ops[l].diagonal_entries();
      inv_diag[l].resize(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double di = real_part(d[i]);
        if (!(di > 0.0)) {
          throw BreakdownError("multigrid: nonpositive diagonal on level " + std::to_string(l) +
                               "; operator is not HPD");
        }
        inv_diag[l][i] = 1.0 / di;
      }
    }
    const auto& c = ops.back();
    const int n = c.size();
    DenseMatrix<T> dense = DenseMatrix<T>::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = c.row_offsets()[i]; k < c.row_offsets()[i + 1]; ++k) dense(i, c.columns()[k]) = c.values()[k];
    coarse.compute(dense);
    if (coarse.info() != Eigen::Success) throw BreakdownError("multigrid: coarsest operator is not HPD");
  }

  // One Gauss-Seidel sweep on level l, forward or backward.
  void sweep(int l, bool forward) const {
    const auto& a = ops[l];
    const auto off = a.row_offsets();
    const auto col = a.columns();
    const auto val = a.values();
    auto& xl = x[l];
    const auto& bl = b[l];
    const int n = a.size();
    for (int step = 0; step < n; ++step) {
      const int i = forward ? step : n - 1 - step;
      T s = bl[i];
      for (int k = off[i]; k < off[i + 1]; ++k)
        if (col[k] != i) s -= val[k] * xl[col[k]];
      xl[i] = s * inv_diag[l][i];
    }
  }

  void cycle(int l) const {
    const int last = static_cast<int>(ops.size()) - 1;
    if (l == last) {
      Eigen::Map<const DenseVector<T>> rhs(b[l].data(), static_cast<Eigen::Index>(b[l].size()));
      const DenseVector<T> sol = coarse.solve(rhs);
      std::copy(sol.data(), sol.data() + sol.size(), x[l].begin());
      return;
    }
    std::fill(x[l].begin(), x[l].end(), T{});
    sweep(l, true);
    ops[l].multiply(x[l], r[l]);
    for (std::size_t i = 0; i < r[l].size(); ++i) r[l][i] = b[l][i] - r[l][i];
    transfers[l].apply_transpose<T>(std::span<const T>(r[l]), std::span<T>(b[l + 1]));
    cycle(l + 1);
    transfers[l].apply<T>(std::span<const T>(x[l + 1]), std::span<T>(r[l]));
    for (std::size_t i = 0; i < r[l].size(); ++i) x[l][i] += r[l][i];
    sweep(l, false);
  }
};

template <class T>
Multigrid<T>::Multigrid(std::vector<TransferMatrix> transfers, const SparseOperator<T>& fine)
    : impl_(std::make_unique<Impl>()) {
  impl_->transfers = std::move(transfers);
  impl_->ops.push_back(fine);
  for (std::size_t l = 0; l < impl_->transfers.size(); ++l) {
    const auto& p = impl_->transfers[l];
    if (p.rows() != impl_->ops.back().size()) {
      throw std::invalid_argument("Multigrid: transfer " + std::to_string(l) + " does not match level size");
    }
    impl_->plans.push_back(plan_galerkin(p, impl_->ops.back()));
    const auto& plan = impl_->plans.back();
    impl_->ops.emplace_back(p.cols(), plan.offsets, plan.columns, execute_galerkin(plan, p, impl_->ops.back()));
  }
  impl_->x.resize(impl_->ops.size());
  impl_->b.resize(impl_->ops.size());
  impl_->r.resize(impl_->ops.size());
  for (std::size_t l = 0; l < impl_->ops.size(); ++l) {
    const auto n = static_cast<std::size_t>(impl_->ops[l].size());
    impl_->x[l].resize(n);
    impl_->b[l].resize(n);
    impl_->r[l].resize(n);
  }
  impl_->refresh_level_data();
}

template <class T>
Multigrid<T>::~Multigrid() = default;
template <class T>
Multigrid<T>::Multigrid(Multigrid&&) noexcept = default;
template <class T>
Multigrid<T>& Multigrid<T>::operator=(Multigrid&&) noexcept = default;

template <class T>
void Multigrid<T>::update(const SparseOperator<T>& fine) {
  if (!fine.same_pattern(impl_->ops.front())) throw std::invalid_argument("Multigrid::update: pattern changed");
  impl_->ops.front() = fine;
  for (std::size_t l = 0; l < impl_->transfers.size(); ++l) {
    auto values = execute_galerkin(impl_->plans[l], impl_->transfers[l], impl_->ops[l]);
    std::copy(values.begin(), values.end(), impl_->ops[l + 1].values().begin());
  }
  impl_->refresh_level_data();
}

template <class T>
int Multigrid<T>::levels() const {
  return static_cast<int>(impl_->ops.size());
}

template <class T>
const SparseOperator<T>& Multigrid<T>::level_operator(int l) const {
  return impl_->ops.at(static_cast<std::size_t>(l));
}

template <class T>
void Multigrid<T>::operator()(std::span<const T> r, std::span<T> z) const {
  if (r.size() != impl_->b[0].size() || z.size() != r.size()) {
    throw std::invalid_argument("Multigrid: dimension mismatch");
  }
  std::copy(r.begin(), r.end(), impl_->b[0].begin());
  impl_->cycle(0);
  std::copy(impl_->x[0].begin(), impl_->x[0].end(), z.begin());
}

template class Multigrid<double>;
template class Multigrid<Complex>;

}  // namespace rbec
