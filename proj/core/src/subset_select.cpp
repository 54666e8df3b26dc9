#include "kadapt/subset_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kadapt/errors.hpp"

namespace kadapt::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BitCover {
    int words = 0;
    std::vector<std::uint64_t> bits;

    static BitCover empty(int cols) {
        BitCover b;
        b.words = (cols + 63) / 64;
        b.bits.assign(b.words, 0);
        return b;
    }
    void set(int j) { bits[j >> 6] |= (std::uint64_t{1} << (j & 63)); }
    bool subset_of(const BitCover& o) const {
        for (int w = 0; w < words; ++w)
            if (bits[w] & ~o.bits[w]) return false;
        return true;
    }
    int count_new(const BitCover& covered) const {
        int n = 0;
        for (int w = 0; w < words; ++w) n += std::popcount(bits[w] & ~covered.bits[w]);
        return n;
    }
};

struct CoverSearch {
    int cols;
    std::vector<BitCover> cover;       // per candidate row
    std::vector<int> row_ids;          // original row index per candidate
    std::vector<std::vector<int>> col_candidates;

    bool dfs(BitCover covered, int budget, std::vector<int>* chosen) const {
        int uncovered_col = -1, fewest = std::numeric_limits<int>::max();
        int remaining = 0;
        for (int j = 0; j < cols; ++j) {
            if (covered.bits[j >> 6] & (std::uint64_t{1} << (j & 63))) continue;
            ++remaining;
            int cnt = static_cast<int>(col_candidates[j].size());
            if (cnt < fewest) {
                fewest = cnt;
                uncovered_col = j;
            }
        }
        if (uncovered_col < 0) return true;
        if (budget <= 0) return false;

        // Candidates covering the scarcest column, best gain first.
        std::vector<std::pair<int, int>> order;  // (-gain, candidate)
        int max_gain = 0;
        for (int c : col_candidates[uncovered_col]) {
            const int gain = cover[c].count_new(covered);
            max_gain = std::max(max_gain, gain);
            order.emplace_back(-gain, c);
        }
        // Bound: even taking the best-possible gain every time cannot finish.
        int best_any = max_gain;
        for (size_t c = 0; c < cover.size(); ++c)
            best_any = std::max(best_any, cover[c].count_new(covered));
        if (static_cast<long>(best_any) * budget < remaining) return false;
        std::sort(order.begin(), order.end());

        for (auto [neg_gain, c] : order) {
            BitCover next = covered;
            for (int w = 0; w < next.words; ++w) next.bits[w] |= cover[c].bits[w];
            if (chosen) chosen->push_back(row_ids[c]);
            if (dfs(next, budget - 1, chosen)) return true;
            if (chosen) chosen->pop_back();
        }
        return false;
    }
};

// Builds the candidate list with empty and subset-dominated rows removed
// (safe for cover decisions).
CoverSearch build_cover_search(const SelectionProblem& p,
                               const std::vector<char>& row_alive) {
    CoverSearch cs;
    cs.cols = p.cols;
    std::vector<BitCover> raw(p.rows);
    std::vector<int> ids;
    for (int i = 0; i < p.rows; ++i) {
        if (!row_alive[i]) continue;
        BitCover b = BitCover::empty(p.cols);
        bool any = false;
        for (int j = 0; j < p.cols; ++j) {
            if (p.usable[static_cast<size_t>(i) * p.cols + j]) {
                b.set(j);
                any = true;
            }
        }
        if (any) {
            raw[i] = std::move(b);
            ids.push_back(i);
        }
    }
    std::vector<char> dominated(p.rows, 0);
    for (size_t a = 0; a < ids.size(); ++a) {
        for (size_t b = 0; b < ids.size(); ++b) {
            if (a == b || dominated[ids[a]] || dominated[ids[b]]) continue;
            if (raw[ids[a]].subset_of(raw[ids[b]])) {
                // keep the lower index on exact ties
                if (!raw[ids[b]].subset_of(raw[ids[a]]) || ids[b] < ids[a])
                    dominated[ids[a]] = 1;
            }
        }
    }
    for (int i : ids) {
        if (dominated[i]) continue;
        cs.cover.push_back(raw[i]);
        cs.row_ids.push_back(i);
    }
    cs.col_candidates.assign(p.cols, {});
    for (size_t c = 0; c < cs.cover.size(); ++c)
        for (int j = 0; j < p.cols; ++j)
            if (cs.cover[c].bits[j >> 6] & (std::uint64_t{1} << (j & 63)))
                cs.col_candidates[j].push_back(static_cast<int>(c));
    return cs;
}

bool cover_feasible_impl(const SelectionProblem& p, std::vector<int>* chosen) {
    for (int j = 0; j < p.cols; ++j) {
        bool any = false;
        for (int i = 0; i < p.rows && !any; ++i)
            any = p.usable[static_cast<size_t>(i) * p.cols + j] != 0;
        if (!any) return false;
    }
    std::vector<char> alive(p.rows, 1);
    CoverSearch cs = build_cover_search(p, alive);
    return cs.dfs(BitCover::empty(p.cols), std::min(p.max_rows, p.rows), chosen);
}

}  // namespace

bool cover_feasible(const SelectionProblem& p) { return cover_feasible_impl(p, nullptr); }

double solve_min_max(const SelectionProblem& p) {
    for (int j = 0; j < p.cols; ++j) {
        bool any = false;
        for (int i = 0; i < p.rows && !any; ++i)
            any = p.usable[static_cast<size_t>(i) * p.cols + j] != 0;
        if (!any)
            throw UnassignableScenario("scenario " + std::to_string(j) +
                                           " has no feasible plan",
                                       j);
    }
    std::vector<double> thresholds;
    for (int i = 0; i < p.rows; ++i)
        for (int j = 0; j < p.cols; ++j)
            if (p.usable[static_cast<size_t>(i) * p.cols + j])
                thresholds.push_back(p.value[static_cast<size_t>(i) * p.cols + j]);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<std::uint8_t> usable_at(static_cast<size_t>(p.rows) * p.cols);
    auto feasible_at = [&](double theta) {
        for (size_t k = 0; k < usable_at.size(); ++k)
            usable_at[k] = p.usable[k] && p.value[k] <= theta;
        SelectionProblem q = p;
        q.usable = usable_at.data();
        return cover_feasible(q);
    };

    int lo = 0, hi = static_cast<int>(thresholds.size()) - 1;
    if (!feasible_at(thresholds[hi]))
        throw SolverFailure("no selection of " + std::to_string(p.max_rows) +
                            " plans covers every scenario");
    while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (feasible_at(thresholds[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return thresholds[lo];
}

namespace {

struct MinSumSearch {
    const SelectionProblem* p;
    int rows, cols, k_max;
    std::vector<int> order;             // search order -> original row
    std::vector<double> suffix_min;     // (rows+1) x cols over search order
    std::vector<int> suffix_usable;     // (rows+1) x cols counts
    std::vector<double> cur_min;        // per column over chosen rows
    std::vector<int> chosen;            // original row ids, search order
    bool have_best = false;
    double best_total_value = kInf;     // smallest total seen (pruning)
    SelectionResult best;

    double value(int i, int j) const { return p->value[static_cast<size_t>(i) * cols + j]; }
    bool usable(int i, int j) const { return p->usable[static_cast<size_t>(i) * cols + j] != 0; }

    void finalize_candidate() {
        double total = 0.0;
        for (int j = 0; j < cols; ++j) {
            if (cur_min[j] == kInf) return;  // not a cover
            total += cur_min[j];
        }
        if (have_best && total > best_total_value + p->value_tol) return;

        // Assignment: per column the usable chosen row attaining cur_min,
        // self first (medoids), then the lowest row index.
        std::vector<int> sorted_chosen = chosen;
        std::sort(sorted_chosen.begin(), sorted_chosen.end());
        std::vector<int> assign(cols, -1);
        for (int j = 0; j < cols; ++j) {
            if (p->self_tiebreak &&
                std::binary_search(sorted_chosen.begin(), sorted_chosen.end(), j) &&
                usable(j, j) && value(j, j) == cur_min[j]) {
                assign[j] = j;
                continue;
            }
            for (int i : sorted_chosen) {
                if (usable(i, j) && value(i, j) == cur_min[j]) {
                    assign[j] = i;
                    break;
                }
            }
        }
        std::vector<int> used(assign.begin(), assign.end());
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());

        bool better;
        if (!have_best) {
            better = true;
        } else if (total < best_total_value - p->value_tol) {
            better = true;
        } else if (used != best.chosen) {
            better = used < best.chosen;
        } else {
            better = assign < best.assignment;
        }
        if (better) {
            have_best = true;
            best_total_value = std::min(best_total_value, total);
            best.chosen = std::move(used);
            best.assignment = std::move(assign);
            best.total = total;
        }
    }

    void dfs(int idx) {
        // Lower bound: every column takes the best of chosen + remaining rows.
        double lb = 0.0;
        const bool budget_left = static_cast<int>(chosen.size()) < k_max;
        bool coverable = true;
        bool suffix_can_matter = false;
        for (int j = 0; j < cols; ++j) {
            double m = cur_min[j];
            if (budget_left && idx < rows) {
                const double s = suffix_min[static_cast<size_t>(idx) * cols + j];
                if (s <= m) {
                    m = std::min(m, s);
                    suffix_can_matter = true;
                }
            }
            if (m == kInf) {
                coverable = false;
                break;
            }
            lb += m;
        }
        if (!coverable) return;
        if (have_best && lb > best_total_value + p->value_tol) return;

        if (idx >= rows || !budget_left || !suffix_can_matter) {
            // Remaining rows cannot lower any column (or none remain): the
            // current chosen set is the only candidate in this subtree.
            finalize_candidate();
            return;
        }

        const int row = order[idx];
        // include
        std::vector<std::pair<int, double>> undo;
        for (int j = 0; j < cols; ++j) {
            if (usable(row, j) && value(row, j) < cur_min[j]) {
                undo.emplace_back(j, cur_min[j]);
                cur_min[j] = value(row, j);
            }
        }
        chosen.push_back(row);
        dfs(idx + 1);
        chosen.pop_back();
        for (auto& [j, v] : undo) cur_min[j] = v;

        // exclude: a column whose last usable row was `row` dies here.
        for (int j = 0; j < cols; ++j) {
            if (cur_min[j] == kInf &&
                suffix_usable[static_cast<size_t>(idx + 1) * cols + j] == 0)
                return;
        }
        dfs(idx + 1);
    }
};

}  // namespace

SelectionResult solve_min_sum(const SelectionProblem& p) {
    for (int j = 0; j < p.cols; ++j) {
        bool any = false;
        for (int i = 0; i < p.rows && !any; ++i)
            any = p.usable[static_cast<size_t>(i) * p.cols + j] != 0;
        if (!any)
            throw UnassignableScenario("scenario " + std::to_string(j) +
                                           " has no feasible plan",
                                       j);
    }

    // Exact-duplicate rows (values and usability) collapse to the lowest
    // index: the lexicographic tie rule can never prefer the higher one.
    std::vector<char> alive(p.rows, 1);
    for (int i = 0; i < p.rows; ++i) {
        if (!alive[i]) continue;
        for (int i2 = i + 1; i2 < p.rows; ++i2) {
            if (!alive[i2]) continue;
            bool same = true;
            for (int j = 0; j < p.cols && same; ++j) {
                const size_t a = static_cast<size_t>(i) * p.cols + j;
                const size_t b = static_cast<size_t>(i2) * p.cols + j;
                same = p.usable[a] == p.usable[b] && (!p.usable[a] || p.value[a] == p.value[b]);
            }
            if (same) alive[i2] = 0;
        }
    }

    MinSumSearch s;
    s.p = &p;
    s.rows = 0;
    s.cols = p.cols;
    s.k_max = std::min(p.max_rows, p.rows);
    for (int i = 0; i < p.rows; ++i)
        if (alive[i]) ++s.rows;

    // Search order: rows attaining many column minima first, then small sums.
    std::vector<double> col_best(p.cols, kInf);
    for (int i = 0; i < p.rows; ++i) {
        if (!alive[i]) continue;
        for (int j = 0; j < p.cols; ++j)
            if (p.usable[static_cast<size_t>(i) * p.cols + j])
                col_best[j] = std::min(col_best[j], p.value[static_cast<size_t>(i) * p.cols + j]);
    }
    struct Key {
        int hits;
        double sum;
        int id;
    };
    std::vector<Key> keys;
    for (int i = 0; i < p.rows; ++i) {
        if (!alive[i]) continue;
        Key k{0, 0.0, i};
        for (int j = 0; j < p.cols; ++j) {
            if (!p.usable[static_cast<size_t>(i) * p.cols + j]) continue;
            const double v = p.value[static_cast<size_t>(i) * p.cols + j];
            if (v == col_best[j]) ++k.hits;
            k.sum += v;
        }
        keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.hits != b.hits) return a.hits > b.hits;
        if (a.sum != b.sum) return a.sum < b.sum;
        return a.id < b.id;
    });
    s.order.resize(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) s.order[i] = keys[i].id;

    s.suffix_min.assign(static_cast<size_t>(s.rows + 1) * p.cols, kInf);
    s.suffix_usable.assign(static_cast<size_t>(s.rows + 1) * p.cols, 0);
    for (int idx = s.rows - 1; idx >= 0; --idx) {
        const int row = s.order[idx];
        for (int j = 0; j < p.cols; ++j) {
            const size_t cur = static_cast<size_t>(idx) * p.cols + j;
            const size_t nxt = static_cast<size_t>(idx + 1) * p.cols + j;
            s.suffix_min[cur] = s.suffix_min[nxt];
            s.suffix_usable[cur] = s.suffix_usable[nxt];
            if (p.usable[static_cast<size_t>(row) * p.cols + j]) {
                s.suffix_min[cur] =
                    std::min(s.suffix_min[cur], p.value[static_cast<size_t>(row) * p.cols + j]);
                s.suffix_usable[cur]++;
            }
        }
    }

    s.cur_min.assign(p.cols, kInf);
    s.dfs(0);
    if (!s.have_best)
        throw SolverFailure("no selection of " + std::to_string(p.max_rows) +
                            " plans covers every scenario");
    return s.best;
}

}  // namespace kadapt::detail
